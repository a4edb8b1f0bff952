//! Command-line front end: build planes, locate spectra, reconstruct
//! cycloids and run the verification suites.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 invalid model, 3 spectrum
//! search failure, 4 bad request.

mod model;
mod render;
mod verify;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use mincyc_core::geometry::{curve_from_radius, curve_from_support_exact, CurveData};
use mincyc_core::plane::{build_plane, validate_plane, PlaneError, PlaneField, PlaneModel};
use mincyc_core::spectrum::{
    classify_gaps, find_ladder, find_n_turn, symmetry_doubling_check, Ladder, SpectrumError,
};
use mincyc_core::sturm::{classify, expanding_growth_factors, monodromy};
use render::SvgStyle;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mincyc", version, about = "Cycloids, evolutes and spectra of normed planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a plane's coefficient fields and check the duality identities
    Plane(PlaneArgs),
    /// Locate the eigenvalue ladder of the periodic problem
    Spectrum(SpectrumArgs),
    /// Reconstruct a cycloid and export it as CSV/SVG
    Cycloid(CycloidArgs),
    /// Run the invariant verification suites
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Plane model: euclidean | lp:<p> | ellipse:<a>,<b> | fourier:a0=..[,k2a=..] | raw JSON
    #[arg(long)]
    model: String,
    /// Grid size (power of two)
    #[arg(long, default_value_t = 2048)]
    n: usize,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlaneArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Residual tolerance for the identity checks
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest ladder index to resolve
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    /// Eigenvalue bisection tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Override the λ search ceiling (default 4(kmax+1)²·max [p,p'][q,q'])
    #[arg(long)]
    lambda_cap: Option<f64>,
    /// Classify the monodromy at this spectral parameter as well
    #[arg(long)]
    probe: Option<f64>,
}

#[derive(Args)]
struct CycloidArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ladder index of the eigen-cycloid
    #[arg(long)]
    k: Option<usize>,
    /// Branch of the pair (1 or 2)
    #[arg(long, default_value_t = 1)]
    branch: u8,
    /// Reconstruct an open cycloid from the closed-form λ=1 space
    #[arg(long)]
    lambda1: bool,
    /// Direction vector for --lambda1, as `x,y`
    #[arg(long, default_value = "1,0")]
    v: String,
    /// Reconstruct the eigen-cycloid whose eigenvalue is closest to this,
    /// failing if none lies within --tol
    #[arg(long)]
    lambda: Option<f64>,
    /// Resolve a curve closing after this many turns (with --k)
    #[arg(long)]
    turns: Option<usize>,
    /// Eigenvalue tolerance (search and --lambda matching)
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest ladder index to search when matching --lambda
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// SVG viewport size in pixels
    #[arg(long, default_value_t = 800)]
    svg_size: u32,
    /// SVG stroke width in pixels
    #[arg(long, default_value_t = 1.5)]
    stroke: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which suite to run
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    /// Eigenvalue tolerance for ladder-backed suites
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Trials for the randomized suites
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Failure category carrying the process exit code.
enum Failure {
    Invariant(String),
    InvalidModel(String),
    SearchFailure(String),
    BadRequest(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::InvalidModel(_) => 2,
            Failure::SearchFailure(_) => 3,
            Failure::BadRequest(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Invariant(m) => format!("invariant failure: {m}"),
            Failure::InvalidModel(m) => format!("invalid model: {m}"),
            Failure::SearchFailure(m) => format!("search failure: {m}"),
            Failure::BadRequest(m) => format!("bad request: {m}"),
            Failure::Io(e) => format!("{e:#}"),
        }
    }
}

impl From<PlaneError> for Failure {
    fn from(e: PlaneError) -> Self {
        match e {
            PlaneError::InvalidModel(m) => Failure::InvalidModel(m),
            PlaneError::GridTooCoarse { .. } => Failure::InvalidModel(e.to_string()),
        }
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        Failure::SearchFailure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plane(args) => cmd_plane(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Cycloid(args) => cmd_cycloid(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn parse_and_build(common: &CommonArgs) -> Result<(PlaneModel, PlaneField), Failure> {
    let model = model::parse_model(&common.model)
        .map_err(|e| Failure::InvalidModel(e.to_string()))?;
    let field = build_plane(&model, common.n)?;
    Ok((model, field))
}

fn emit<T: Serialize>(common: &CommonArgs, report: &T) -> Result<(), Failure> {
    let body = serde_json::to_string_pretty(report).expect("serializable report");
    match &common.out {
        Some(path) => render::write_atomic(path, &body).map_err(Failure::Io)?,
        None => println!("{body}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn cmd_plane(args: PlaneArgs) -> Result<(), Failure> {
    let (model, field) = parse_and_build(&args.common)?;
    let report = validate_plane(&field, args.tol);
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a PlaneModel,
        singular_nodes: &'a [usize],
        report: &'a mincyc_core::plane::PlaneReport,
    }
    let pass = report.all_pass();
    emit(
        &args.common,
        &Out { model: &model, singular_nodes: field.singular_nodes(), report: &report },
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("plane identity residuals exceed {}", args.tol)))
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    let (_, field) = parse_and_build(&args.common)?;
    let ladder =
        mincyc_core::spectrum::find_ladder_capped(&field, args.kmax.max(2), args.tol, args.lambda_cap)?;
    let gaps = classify_gaps(&field, &ladder, 3)?;
    let doubling = symmetry_doubling_check(&field, &ladder)?;

    #[derive(Serialize)]
    struct Probe {
        lambda: f64,
        trace: f64,
        class: mincyc_core::sturm::MonodromyClass,
        growth_factors: Vec<f64>,
    }
    let probe = match args.probe {
        Some(lambda) => {
            let m = monodromy(&field, lambda, 1e-12).map_err(SpectrumError::from)?;
            Some(Probe {
                lambda,
                trace: m.trace(),
                class: classify(&m, 1e-7),
                growth_factors: expanding_growth_factors(&m, 10),
            })
        }
        None => None,
    };

    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        ladder: mincyc_core::spectrum::LadderReport,
        gap_samples: Vec<mincyc_core::spectrum::GapSample>,
        doubling: mincyc_core::spectrum::DoublingReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        probe: Option<Probe>,
    }
    emit(
        &args.common,
        &Out { ladder: ladder.report(&field), gap_samples: gaps, doubling, probe },
    )
}

#[derive(Serialize)]
struct CurveSummary {
    lambda: f64,
    k: Option<usize>,
    branch: Option<u8>,
    turns: usize,
    cusps: Vec<f64>,
    vertex_count: usize,
    closure_miss_relative: f64,
}

fn cmd_cycloid(args: CycloidArgs) -> Result<(), Failure> {
    let (model, field) = parse_and_build(&args.common)?;
    let picked =
        usize::from(args.lambda1) + usize::from(args.k.is_some()) + usize::from(args.lambda.is_some());
    if picked != 1 {
        return Err(Failure::BadRequest(
            "choose exactly one of --k, --lambda1, --lambda (optionally --turns with --k)".into(),
        ));
    }
    if !(1..=2).contains(&args.branch) {
        return Err(Failure::BadRequest("branch must be 1 or 2".into()));
    }

    let (curve, summary) = if args.lambda1 {
        let v = parse_vector(&args.v)?;
        let r: Vec<f64> = field.q().iter().map(|q| v[0] * q[1] - v[1] * q[0]).collect();
        let turns = args.turns.unwrap_or(1).max(1);
        let tiled: Vec<f64> = (0..turns * field.n()).map(|j| r[j % field.n()]).collect();
        let curve = curve_from_radius(&field, &tiled, [0.0, 0.0], turns);
        let summary = CurveSummary {
            lambda: 1.0,
            k: Some(1),
            branch: None,
            turns,
            cusps: curve.cusps.clone(),
            vertex_count: curve.vertices.len(),
            closure_miss_relative: curve.closure_miss_relative(&field),
        };
        (curve, summary)
    } else if let (Some(turns), Some(k)) = (args.turns, args.k) {
        if turns < 2 {
            return Err(Failure::BadRequest("--turns needs N >= 2".into()));
        }
        if gcd(k, turns) != 1 {
            return Err(Failure::BadRequest(format!(
                "k = {k} and N = {turns} share a factor; the curve closes earlier"
            )));
        }
        let k_limit = if k > turns { k } else { 0 };
        let records = find_n_turn(&field, turns, args.tol, k_limit)?;
        let record = records
            .into_iter()
            .find(|r| r.k == k)
            .ok_or_else(|| Failure::BadRequest(format!("no {turns}-turn record with k = {k}")))?;
        let r: Vec<f64> = record.h.iter().map(|v| (1.0 - record.lambda) * v).collect();
        let curve = curve_from_radius(&field, &r, [0.0, 0.0], turns);
        let summary = CurveSummary {
            lambda: record.lambda,
            k: Some(k),
            branch: None,
            turns,
            cusps: curve.cusps.clone(),
            vertex_count: curve.vertices.len(),
            closure_miss_relative: curve.closure_miss_relative(&field),
        };
        (curve, summary)
    } else {
        // eigen-cycloid by index or by eigenvalue
        let k_for_ladder = args.k.unwrap_or(args.kmax).max(2);
        let ladder = find_ladder(&field, k_for_ladder, args.tol)?;
        let record = match (args.k, args.lambda) {
            (Some(k), None) => {
                if k < 2 {
                    return Err(Failure::BadRequest(
                        "closed eigen-cycloids start at k = 2 (the k = 1 curves are open; use --lambda1)"
                            .into(),
                    ));
                }
                let (a, b) = ladder.pair(k);
                if args.branch == 1 {
                    a
                } else {
                    b
                }
            }
            (None, Some(lambda)) => {
                let matching = ladder
                    .branches()
                    .filter(|r| r.k >= 2)
                    .min_by(|x, y| (x.lambda - lambda).abs().total_cmp(&(y.lambda - lambda).abs()))
                    .expect("ladder non-empty");
                if (matching.lambda - lambda).abs() > args.tol.max(1e-9) * lambda.abs().max(1.0) {
                    return Err(Failure::BadRequest(format!(
                        "λ = {lambda} is not an eigenvalue within tolerance (nearest: {} at k = {})",
                        matching.lambda, matching.k
                    )));
                }
                matching
            }
            _ => unreachable!("argument combinations validated above"),
        };
        let curve = curve_from_support_exact(&field, &record.h, &record.hw, record.lambda);
        let reconstructed = curve_from_radius(&field, &curve.r, [0.0, 0.0], 1);
        let summary = CurveSummary {
            lambda: record.lambda,
            k: Some(record.k),
            branch: Some(record.branch),
            turns: 1,
            cusps: curve.cusps.clone(),
            vertex_count: curve.vertices.len(),
            closure_miss_relative: reconstructed.closure_miss_relative(&field),
        };
        (curve, summary)
    };

    write_curve_outputs(&args, &field, &curve)?;
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a PlaneModel,
        n: usize,
        curve: &'a CurveSummary,
    }
    emit(&args.common, &Out { model: &model, n: field.n(), curve: &summary })
}

fn write_curve_outputs(
    args: &CycloidArgs,
    field: &PlaneField,
    curve: &CurveData,
) -> Result<(), Failure> {
    if let Some(path) = &args.csv {
        render::write_atomic(path, &render::curve_csv(field, curve)).map_err(Failure::Io)?;
    }
    if let Some(path) = &args.svg {
        let style = SvgStyle { size: args.svg_size, stroke_width: args.stroke };
        render::write_atomic(path, &render::curve_svg(field, curve, &style))
            .map_err(Failure::Io)?;
    }
    Ok(())
}

fn parse_vector(text: &str) -> Result<[f64; 2], Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::BadRequest(format!("expected `x,y`, got `{text}`")));
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Failure::BadRequest(format!("bad number `{}`", parts[0])))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Failure::BadRequest(format!("bad number `{}`", parts[1])))?;
    if x == 0.0 && y == 0.0 {
        return Err(Failure::BadRequest("direction vector must be nonzero".into()));
    }
    Ok([x, y])
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let (model, field) = parse_and_build(&args.common)?;
    let suites: Vec<&str> = match args.suite.as_str() {
        "all" => vec!["plane", "spectrum", "geometry", "analysis"],
        one @ ("plane" | "spectrum" | "geometry" | "analysis") => vec![one],
        other => {
            return Err(Failure::BadRequest(format!(
                "unknown suite `{other}` (all | plane | spectrum | geometry | analysis)"
            )))
        }
    };

    let needs_ladder = suites.iter().any(|s| *s != "plane");
    let ladder: Option<Ladder> = if needs_ladder {
        Some(find_ladder(&field, args.kmax.max(2), args.tol)?)
    } else {
        None
    };

    let mut sections = Vec::new();
    for suite in suites {
        let section = match suite {
            "plane" => verify::plane_suite(&field),
            "spectrum" => verify::spectrum_suite(&field, ladder.as_ref().unwrap(), args.seed),
            "geometry" => verify::geometry_suite(&field, ladder.as_ref().unwrap()),
            "analysis" => {
                verify::analysis_suite(&field, ladder.as_ref().unwrap(), args.trials, args.seed)
            }
            _ => unreachable!(),
        };
        sections.push(section?);
    }
    let pass = sections.iter().all(|s| s.pass);

    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a PlaneModel,
        n: usize,
        seed: u64,
        pass: bool,
        suites: &'a [verify::SuiteReport],
    }
    emit(
        &args.common,
        &Out { model: &model, n: field.n(), seed: args.seed, pass, suites: &sections },
    )?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = sections
            .iter()
            .filter(|s| !s.pass)
            .flat_map(|s| s.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()))
            .collect();
        Err(Failure::Invariant(format!("failed checks: {}", failed.join(", "))))
    }
}
