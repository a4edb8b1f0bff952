//! End-to-end checks of the binary: subcommands, file outputs, exit codes
//! and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn mincyc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mincyc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut dir = std::env::temp_dir();
    dir.push(format!("mincyc-test-{}-{name}", std::process::id()));
    dir
}

#[test]
fn plane_reports_pass_for_euclidean() {
    let out = mincyc(&["plane", "--model", "euclidean", "--n", "512"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["model"]["family"], "euclidean");
    assert!(body["report"]["duality"]["pass"].as_bool().unwrap());
    let residual = body["report"]["duality"]["max_residual"].as_f64().unwrap();
    assert!(residual < 1e-10);
}

#[test]
fn invalid_models_exit_2() {
    let out = mincyc(&["plane", "--model", "fourier:a0=1,k2a=0.9", "--n", "256"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mincyc(&["plane", "--model", "lp:1", "--n", "256"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mincyc(&["spectrum", "--model", "nonsense", "--n", "256"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_of_circle_is_squares() {
    let out = mincyc(&["spectrum", "--model", "euclidean", "--n", "512", "--kmax", "4"]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ladder = body["ladder"].as_array().unwrap();
    for entry in ladder {
        let k = entry["k"].as_u64().unwrap();
        let lambda = entry["lambda"].as_f64().unwrap();
        assert!((lambda - (k * k) as f64).abs() < 1e-6, "k={k}: {lambda}");
        let expected = if k % 2 == 0 { "periodic" } else { "antiperiodic" };
        assert_eq!(entry["ptype"], expected);
    }
    assert_eq!(body["doubling"]["applicable"], true);
}

#[test]
fn spectrum_probe_classifies_instability() {
    let out = mincyc(&[
        "spectrum", "--model", "lp:3", "--n", "1024", "--kmax", "2", "--probe", "19.79",
    ]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["probe"]["class"]["tag"], "HyperbolicPlus");
    let growth = body["probe"]["growth_factors"].as_array().unwrap();
    assert_eq!(growth.len(), 10);
    for g in growth {
        assert!(g.as_f64().unwrap() > 1.05);
    }
}

#[test]
fn cycloid_writes_csv_and_svg() {
    let csv = tmp("c.csv");
    let svg = tmp("c.svg");
    let json = tmp("c.json");
    let out = mincyc(&[
        "cycloid", "--model", "euclidean", "--n", "512", "--k", "2",
        "--csv", csv.to_str().unwrap(),
        "--svg", svg.to_str().unwrap(),
        "--out", json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("t,x,y,h,r,is_cusp,is_vertex\n"));
    assert_eq!(csv_text.lines().count(), 513);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert_eq!(svg_text.matches("<circle").count(), 4, "four cusp markers");
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(body["curve"]["cusps"].as_array().unwrap().len(), 4);
    for path in [csv, svg, json] {
        std::fs::remove_file(path).ok();
    }
}

#[test]
fn open_cycloid_is_open() {
    let out = mincyc(&["cycloid", "--model", "lp:3", "--n", "1024", "--lambda1", "--v", "0,1"]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let miss = body["curve"]["closure_miss_relative"].as_f64().unwrap();
    assert!(miss > 1e-3, "λ=1 curve must not close (miss {miss})");
}

#[test]
fn bad_requests_exit_4() {
    let out = mincyc(&["cycloid", "--model", "euclidean", "--n", "256"]);
    assert_eq!(out.status.code(), Some(4), "no selection given");
    let out = mincyc(&["cycloid", "--model", "euclidean", "--n", "256", "--k", "1"]);
    assert_eq!(out.status.code(), Some(4), "k=1 curves are open");
    let out = mincyc(&[
        "cycloid", "--model", "euclidean", "--n", "512", "--lambda", "5.5", "--kmax", "3",
    ]);
    assert_eq!(out.status.code(), Some(4), "5.5 is not an eigenvalue");
    let out = mincyc(&[
        "cycloid", "--model", "euclidean", "--n", "256", "--turns", "4", "--k", "2",
    ]);
    assert_eq!(out.status.code(), Some(4), "gcd(2,4) > 1");
    let out = mincyc(&["verify", "--model", "euclidean", "--n", "256", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_all_passes_on_circle() {
    let out = mincyc(&[
        "verify", "--model", "euclidean", "--n", "512", "--suite", "all", "--kmax", "4",
        "--trials", "8", "--seed", "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["pass"], true);
    assert_eq!(body["suites"].as_array().unwrap().len(), 4);
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "spectrum", "--model", "ellipse:2,1", "--n", "512", "--kmax", "3",
    ];
    let first = mincyc(&args);
    let second = mincyc(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "identical bytes across runs");
}
