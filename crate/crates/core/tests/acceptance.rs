//! Acceptance suite: one test per shipped criterion, each printing a
//! `[PASS]`/`[FAIL]` line with the measured numbers.
//!
//! Criterion 4 encodes a reference band for the L³ k=5 eigenvalue whose
//! center (27.1) was produced by a coarse polygonal approximation; the
//! smooth-problem value is exactly 28; the L³ ladder is the triangular
//! numbers (see `weak_form_oracle.rs` for an independent derivation).
//! That test is intentionally left asserting the stated band and is
//! expected to stay red; its other clauses (double-ness, recorded value)
//! are verified here and pass.

use mincyc_core::analysis::{
    four_vertex_suite, gram_deviation, involute_iteration, project_to_c0, six_vertex_suite,
    sturm_hurwitz_count,
};
use mincyc_core::geometry::{curve_from_radius, curve_from_support_exact};
use mincyc_core::plane::{build_plane, validate_plane, FourierTerm, PlaneField, PlaneModel};
use mincyc_core::rng::Rng;
use mincyc_core::spectrum::{
    classify_gaps, find_ladder, find_n_turn, lambda_one_eigenspace, symmetry_doubling_check,
    Ladder,
};
use mincyc_core::sturm::{classify, expanding_growth_factors, monodromy, MonodromyTag};
use std::sync::OnceLock;
use std::time::Instant;

const N: usize = 2048;
const EIGEN_TOL: f64 = 1e-9;

struct Fixture {
    field: PlaneField,
    ladder: Ladder,
}

fn fixture(cell: &'static OnceLock<Fixture>, model: PlaneModel, k_max: usize) -> &'static Fixture {
    cell.get_or_init(|| {
        let field = build_plane(&model, N).expect("model builds");
        let ladder = find_ladder(&field, k_max, EIGEN_TOL).expect("ladder resolves");
        Fixture { field, ladder }
    })
}

fn euclid() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    fixture(&CELL, PlaneModel::euclidean(), 8)
}

fn lp3() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    fixture(&CELL, PlaneModel::lp(3.0), 8)
}

fn lp4() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    fixture(&CELL, PlaneModel::lp(4.0), 7)
}

fn ellipse() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    fixture(&CELL, PlaneModel::ellipse(2.0, 1.0), 7)
}

fn fourier() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    fixture(
        &CELL,
        PlaneModel::fourier(1.0, vec![FourierTerm { k: 2, a: 0.2, b: 0.0 }]),
        7,
    )
}

fn builtins() -> [&'static Fixture; 5] {
    [euclid(), lp3(), lp4(), ellipse(), fourier()]
}

fn name(f: &Fixture) -> String {
    format!("{:?}", f.field.model().family)
}

#[test]
fn acceptance_01_euclidean_spectrum() {
    let started = Instant::now();
    let field = build_plane(&PlaneModel::euclidean(), N).unwrap();
    let ladder = find_ladder(&field, 8, EIGEN_TOL).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=8usize {
        let (a, b) = ladder.pair(k);
        let expect = (k * k) as f64;
        worst = worst
            .max((a.lambda - expect).abs())
            .max((b.lambda - expect).abs());
    }
    let elapsed = started.elapsed();
    println!(
        "[{}] criterion 01: euclidean ladder k<=8, max |λ_k - k²| = {worst:.2e}, {elapsed:?}",
        if worst < 1e-6 && elapsed.as_secs() < 30 { "PASS" } else { "FAIL" }
    );
    assert!(worst < 1e-6, "max deviation {worst:.3e}");
    assert!(elapsed.as_secs() < 30, "ladder took {elapsed:?}");
}

#[test]
fn acceptance_02_determinant_invariant() {
    let mut worst = 0.0f64;
    let mut rng = Rng::new(2026);
    for fix in [euclid(), lp3(), ellipse()] {
        for _ in 0..20 {
            let lambda = rng.uniform_in(0.0, 100.0);
            let m = monodromy(&fix.field, lambda, 1e-12).unwrap();
            let dev = (m.det() - 1.0).abs();
            assert!(
                dev < 1e-9,
                "{} λ={lambda}: det residual {dev:.2e}",
                name(fix)
            );
            worst = worst.max(dev);
        }
    }
    println!("[PASS] criterion 02: |det A(λ,π) - 1| < 1e-9 over 60 draws (worst {worst:.2e})");
}

#[test]
fn acceptance_03_lambda_one_eigenspace() {
    for fix in builtins() {
        let space = lambda_one_eigenspace(&fix.field);
        assert!(
            space.ode_residual < 1e-7,
            "{}: residual {:.3e}",
            name(fix),
            space.ode_residual
        );
        assert!(space.antiperiodicity < 1e-8, "{}", name(fix));
        for miss in space.closure_miss {
            assert!(miss >= 1e-3, "{}: closure miss {miss:.3e}", name(fix));
        }
    }
    println!("[PASS] criterion 03: λ=1 closed forms solve, anti-reflect and stay open on all built-ins");
}

#[test]
fn acceptance_04_lp3_headline_eigenvalue() {
    let fix = lp3();
    let (a, b) = fix.ladder.pair(5);
    let gap = (b.lambda - a.lambda).abs();
    assert!(a.double && b.double, "pair must be flagged double");
    assert!(gap < 1e-6, "gap {gap:.3e}");
    let lambda = a.lambda;
    let in_band = (26.6..=27.6).contains(&lambda);
    println!(
        "[{}] criterion 04: L³ k=5 double eigenvalue computed λ = {lambda:.9} (gap {gap:.1e}); \
         stated reference band [26.6, 27.6] from a polygonal approximation of 27.1",
        if in_band { "PASS" } else { "FAIL" }
    );
    // The computed value is exactly 28 (triangular-number ladder; verified
    // independently by the weak-form oracle and by closed forms).  The
    // band is asserted as stated rather than re-tuned to the solver.
    assert!(
        in_band,
        "computed λ_5 = {lambda:.9}, outside the stated band [26.6, 27.6]; \
         the smooth-problem value is 28, see tests/weak_form_oracle.rs"
    );
}

#[test]
fn acceptance_05_unbounded_probe() {
    let fix = lp3();
    let m = monodromy(&fix.field, 19.79, 1e-12).unwrap();
    let class = classify(&m, 1e-7);
    assert!(
        matches!(class.tag, MonodromyTag::HyperbolicPlus | MonodromyTag::HyperbolicMinus),
        "trace {}",
        m.trace()
    );
    let factors = expanding_growth_factors(&m, 10);
    assert_eq!(factors.len(), 10);
    let min = factors.iter().fold(f64::MAX, |m, v| m.min(*v));
    assert!(min >= 1.05, "growth factor {min}");
    println!(
        "[PASS] criterion 05: λ=19.79 on L³ is {:?} (trace {:.4}), min growth {min:.4}",
        class.tag,
        m.trace()
    );
}

#[test]
fn acceptance_06_interlacing_and_gaps() {
    for fix in [lp3(), ellipse()] {
        for k in 2..=6usize {
            let below = fix.ladder.lambda(k - 1, 2);
            let (a, b) = fix.ladder.pair(k);
            let above = fix.ladder.lambda(k + 1, 1);
            assert!(
                below < a.lambda && a.lambda <= b.lambda && b.lambda < above,
                "{} k={k}: {below} {} {} {above}",
                name(fix),
                a.lambda,
                b.lambda
            );
        }
        let samples = classify_gaps(&fix.field, &fix.ladder, 3).unwrap();
        assert!(!samples.is_empty());
        for s in &samples {
            assert_eq!(
                s.tag,
                MonodromyTag::EllipticM0,
                "{} gap above k={} at λ={}",
                name(fix),
                s.k_below,
                s.lambda
            );
        }
    }
    println!("[PASS] criterion 06: interlacing holds and all gap samples are elliptic on L³ and ellipse");
}

#[test]
fn acceptance_07_symmetry_doubling() {
    for fix in [lp3(), lp4()] {
        let report = symmetry_doubling_check(&fix.field, &fix.ladder).unwrap();
        assert!(report.applicable, "{}", name(fix));
        for entry in report.entries.iter().filter(|e| e.k <= 7) {
            assert!(
                entry.gap < 1e-6 && entry.neg_identity_dev < 1e-6,
                "{} k={}: gap {:.2e}, dev {:.2e}",
                name(fix),
                entry.k,
                entry.gap,
                entry.neg_identity_dev
            );
        }
    }
    println!("[PASS] criterion 07: odd pairs coincide and A(λ_k, π) = -Id on L³ and L⁴");
}

#[test]
fn acceptance_08_cusp_counts_and_closure() {
    for fix in builtins() {
        for k in 2..=6usize {
            for rec in fix.ladder.branches().filter(|r| r.k == k) {
                let curve =
                    curve_from_support_exact(&fix.field, &rec.h, &rec.hw, rec.lambda);
                assert_eq!(
                    curve.cusps.len(),
                    2 * k,
                    "{} k={k} branch {}: {} cusps",
                    name(fix),
                    rec.branch,
                    curve.cusps.len()
                );
                let reconstructed = curve_from_radius(&fix.field, &curve.r, [0.0, 0.0], 1);
                let miss = reconstructed.closure_miss_relative(&fix.field);
                assert!(
                    miss < 1e-6,
                    "{} k={k} branch {}: closure miss {miss:.3e}",
                    name(fix),
                    rec.branch
                );
            }
        }
    }
    println!("[PASS] criterion 08: every eigen-cycloid (k=2..6, all built-ins) has exactly 2k cusps and closes");
}

#[test]
fn acceptance_09_n_turn_closure() {
    let e = euclid();
    let recs = find_n_turn(&e.field, 3, 1e-10, 0).unwrap();
    assert_eq!(recs.len(), 2);
    assert!((recs[0].lambda - 1.0 / 9.0).abs() < 1e-8, "{}", recs[0].lambda);
    assert!((recs[1].lambda - 4.0 / 9.0).abs() < 1e-8, "{}", recs[1].lambda);

    let fix = lp3();
    let recs = find_n_turn(&fix.field, 3, EIGEN_TOL, 0).unwrap();
    assert_eq!(recs.len(), 2);
    for rec in &recs {
        let r: Vec<f64> = rec.h.iter().map(|v| (1.0 - rec.lambda) * v).collect();
        let curve = curve_from_radius(&fix.field, &r, [0.0, 0.0], 3);
        let full = curve.closure_miss_relative(&fix.field);
        assert!(full < 1e-6, "k={}: 3-turn miss {full:.3e}", rec.k);
        for turn in 1..=2usize {
            let miss = curve.partial_miss_relative(turn);
            assert!(miss >= 1e-3, "k={}: closed too early at turn {turn} ({miss:.3e})", rec.k);
        }
    }
    println!("[PASS] criterion 09: euclidean 3-turn values are 1/9 and 4/9; L³ epicycloids close after exactly 3 turns");
}

#[test]
fn acceptance_10_orthonormal_basis() {
    let fix = lp3();
    let dev = gram_deviation(&fix.field, &fix.ladder, 7);
    assert!(dev < 1e-6, "gram deviation {dev:.3e}");
    println!("[PASS] criterion 10: 13-element Gram matrix on L³ within {dev:.2e} of identity");
}

#[test]
fn acceptance_11_involute_iteration() {
    let fix = lp3();
    let lambda2 = fix.ladder.lambda(2, 1);
    let target = 1.0 / lambda2;
    let mut rng = Rng::new(11);
    for trial in 0..10 {
        let raw: Vec<f64> = {
            let coeffs: Vec<(f64, f64, f64)> =
                (2..7).map(|k| (k as f64, rng.normal(), rng.normal())).collect();
            fix.field
                .grid()
                .nodes()
                .map(|t| {
                    coeffs
                        .iter()
                        .map(|(k, a, b)| a * (k * t).cos() + b * (k * t).sin())
                        .sum()
                })
                .collect()
        };
        let h = project_to_c0(&fix.field, &fix.ladder, &raw);
        let report = involute_iteration(&fix.field, &h, 12, &fix.ladder).unwrap();
        assert!(
            (report.final_ratio - target).abs() < 0.01 * target,
            "trial {trial}: ratio {} vs {target}",
            report.final_ratio
        );
        for w in report.norms.windows(2).skip(2) {
            assert!(w[1] < w[0], "trial {trial}: norms not decreasing {:?}", report.norms);
        }
    }
    println!(
        "[PASS] criterion 11: involute norm ratios converge to 1/λ_2 = {target:.6} within 1% by n=12 (10 trials)"
    );
}

#[test]
fn acceptance_12_sturm_hurwitz() {
    let fix = lp3();
    let mut rng = Rng::new(12);
    let mut done = 0;
    for trial in 0..100 {
        let k0 = [3usize, 4, 5][trial % 3];
        let mut h = vec![0.0; fix.field.n()];
        for rec in fix.ladder.branches().filter(|r| r.k >= k0 && r.k <= 8) {
            let c = rng.normal() / (rec.k as f64);
            for j in 0..h.len() {
                h[j] += c * rec.h[j];
            }
        }
        let check = sturm_hurwitz_count(&fix.field, &h, k0, &fix.ladder).unwrap();
        assert!(
            check.zero_count >= 2 * k0,
            "trial {trial}: {} zeros < {}",
            check.zero_count,
            2 * k0
        );
        done += 1;
    }
    // sharpness: eigenfunctions alone meet the bound exactly
    for k0 in [3usize, 4, 5] {
        let (rec, _) = fix.ladder.pair(k0);
        let check = sturm_hurwitz_count(&fix.field, &rec.h, k0, &fix.ladder).unwrap();
        assert_eq!(check.zero_count, 2 * k0);
    }
    println!("[PASS] criterion 12: {done} random truncated combinations each have >= 2k₀ zeros; eigenfunctions are sharp");
}

#[test]
fn acceptance_13_vertex_theorems() {
    for fix in [euclid(), lp3(), ellipse()] {
        let four = four_vertex_suite(&fix.field, &fix.ladder, 50, 13);
        assert!(four.pass && four.min_vertices >= 4, "{}: {four:?}", name(fix));
        let six = six_vertex_suite(&fix.field, &fix.ladder, 50, 13);
        assert!(six.pass && six.min_vertices >= 6, "{}: min {} vertices", name(fix), six.min_vertices);
        for rec in &six.records {
            assert!(rec.width_deviation < 1e-7, "{}: width dev {:.2e}", name(fix), rec.width_deviation);
        }
    }
    println!("[PASS] criterion 13: 50 random curves per plane have >=4 vertices; 50 constant-width curves have >=6");
}

#[test]
fn acceptance_14_classical_cycloid_overlay() {
    let fix = euclid();
    let radius = 1.0f64;
    let theta0 = 0.7f64;
    let r: Vec<f64> = fix
        .field
        .grid()
        .nodes()
        .map(|t| 4.0 * radius * (t - theta0).sin())
        .collect();
    let curve = curve_from_radius(&fix.field, &r, [0.0, 0.0], 1);

    let oracle = |t: f64| {
        let phase = t - theta0;
        [
            radius * (2.0 * phase - (2.0 * phase).sin()),
            radius * (1.0 - (2.0 * phase).cos()),
        ]
    };
    // the classical formula parameterizes the train with the opposite
    // tangent-angle orientation; try both parameter conventions and keep
    // the better rigid fit
    let mut best = f64::MAX;
    for reversed in [false, true] {
        let targets: Vec<[f64; 2]> = fix
            .field
            .grid()
            .nodes()
            .map(|t| oracle(if reversed { 2.0 * theta0 - t } else { t }))
            .collect();
        best = best.min(rigid_fit_max_distance(&curve.points, &targets));
    }
    assert!(best < 1e-6 * radius, "overlay distance {best:.3e}");
    println!("[PASS] criterion 14: reconstructed cycloid matches the parametric train within {best:.2e} after rigid alignment");
}

/// Optimal rotation+translation of `pts` onto `targets` (least squares),
/// returning the max pointwise distance afterwards.
fn rigid_fit_max_distance(pts: &[[f64; 2]], targets: &[[f64; 2]]) -> f64 {
    let n = pts.len() as f64;
    let mean = |v: &[[f64; 2]]| {
        let mut m = [0.0; 2];
        for p in v {
            m[0] += p[0];
            m[1] += p[1];
        }
        [m[0] / n, m[1] / n]
    };
    let mp = mean(pts);
    let mt = mean(targets);
    let mut dot = 0.0;
    let mut crs = 0.0;
    for (p, t) in pts.iter().zip(targets) {
        let a = [p[0] - mp[0], p[1] - mp[1]];
        let b = [t[0] - mt[0], t[1] - mt[1]];
        dot += a[0] * b[0] + a[1] * b[1];
        crs += a[0] * b[1] - a[1] * b[0];
    }
    let ang = crs.atan2(dot);
    let (s, c) = ang.sin_cos();
    pts.iter()
        .zip(targets)
        .map(|(p, t)| {
            let a = [p[0] - mp[0], p[1] - mp[1]];
            let rotated = [c * a[0] - s * a[1], s * a[0] + c * a[1]];
            let dx = rotated[0] + mt[0] - t[0];
            let dy = rotated[1] + mt[1] - t[1];
            (dx * dx + dy * dy).sqrt()
        })
        .fold(0.0f64, f64::max)
}

#[test]
fn acceptance_15_bracket_identity() {
    // [p,p'][q,q']² = [q',q''], checked against an independent numerical
    // derivative of the sampled dual data (L^p excluded: its validation
    // happens off the singular windows in the module tests)
    for fix in [euclid(), ellipse(), fourier()] {
        let report = validate_plane(&fix.field, 1e-8);
        assert!(
            report.bracket_identity.pass,
            "{}: residual {:.3e}",
            name(fix),
            report.bracket_identity.max_residual
        );
    }
    println!("[PASS] criterion 15: bracket identity within 1e-8 on euclidean, ellipse and support-function planes");
}
