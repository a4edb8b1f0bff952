//! Eigenvalue ladder of the 2π-periodic problem, closed-form λ=1 solutions,
//! N-turn eigenvalues, and the symmetry-induced doubling check.
//!
//! Coefficients are π-periodic, so the period-2π spectrum splits into the
//! π-periodic branches (even index, trace of the half-period monodromy
//! equal to +2) and the π-antiperiodic branches (odd index, trace −2).
//! Each index k is first bracketed through the rotation index, which is
//! strictly increasing in λ and equals k/2 over a half period at an
//! eigenvalue, and then pinned down by bisection.  Running the rotation bisection from
//! both canonical initial directions makes the search robust when the pair
//! is double (the discriminant only touches ±2 tangentially there, so a
//! sign-based search on it would be blind).

use crate::geometry;
use crate::ode::OdeError;
use crate::plane::PlaneField;
use crate::sturm::{self, classify, monodromy, monodromy_over, Monodromy, MonodromyTag};
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("rotation index never reached {target} below the search cap {cap:.3e} (k = {k})")]
    BracketFailure { k: usize, target: f64, cap: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Periodic,
    Antiperiodic,
}

/// One branch of the eigenvalue ladder with its eigenfunction samples.
#[derive(Debug, Clone)]
pub struct EigenRecord {
    /// Index: the eigenfunction has exactly 2k sign changes per period.
    pub k: usize,
    pub branch: u8,
    pub lambda: f64,
    pub ptype: Periodicity,
    /// Both branches of the pair agree within tolerance.
    pub double: bool,
    /// Support-function samples on the full grid, unit weighted norm.
    pub h: Vec<f64>,
    /// Samples of h'/[q,q'] (the second transport coordinate).
    pub hw: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Ladder {
    pub records: Vec<EigenRecord>,
    pub k_max: usize,
    pub tol: f64,
}

impl Ladder {
    /// Both branches at index k >= 1.
    pub fn pair(&self, k: usize) -> (&EigenRecord, &EigenRecord) {
        let mut it = self.records.iter().filter(|r| r.k == k);
        let a = it.next().expect("index within ladder");
        let b = it.next().expect("two branches per index");
        (a, b)
    }

    pub fn lambda(&self, k: usize, branch: u8) -> f64 {
        self.records
            .iter()
            .find(|r| r.k == k && r.branch == branch)
            .expect("record present")
            .lambda
    }

    /// The constant eigenfunction at λ = 0.
    pub fn kernel(&self) -> &EigenRecord {
        &self.records[0]
    }

    /// Records with k >= 1 in (k, branch) order.
    pub fn branches(&self) -> impl Iterator<Item = &EigenRecord> {
        self.records.iter().filter(|r| r.k >= 1)
    }

    pub fn report(&self, field: &PlaneField) -> LadderReport {
        LadderReport {
            model: field.model().clone(),
            n: field.n(),
            ladder: self
                .records
                .iter()
                .map(|r| LadderEntry {
                    k: r.k,
                    branch: r.branch,
                    lambda: r.lambda,
                    ptype: r.ptype,
                    double: r.double,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub model: crate::plane::PlaneModel,
    pub n: usize,
    pub ladder: Vec<LadderEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderEntry {
    pub k: usize,
    pub branch: u8,
    pub lambda: f64,
    pub ptype: Periodicity,
    pub double: bool,
}

fn rk_tol_for(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-13, 1e-8)
}

/// Rotation of the phase vector over the monodromy half-period, in turns,
/// starting from phase angle β0 at the staggered-grid origin.
fn half_rotation(field: &PlaneField, lambda: f64, beta0: f64) -> Result<f64, OdeError> {
    let t0 = field.grid().origin();
    sturm::rotation_over(field, lambda, beta0, t0, t0 + PI)
}

fn discriminant(field: &PlaneField, lambda: f64) -> Result<f64, OdeError> {
    Ok(monodromy(field, lambda, sturm::MONODROMY_RK_TOL)?.trace())
}

/// Gap threshold below which the two rotation bisections are considered to
/// have found one double eigenvalue; also the discriminant band that
/// separates a genuine instability interval from tangency noise.
const SPLIT_DISCRIMINANT_THRESHOLD: f64 = 1e-7;

/// Locates λ_0 = 0, the double λ_1 = 1 and the pairs λ_k^1 <= λ_k^2 for
/// 2 <= k <= k_max, with eigenfunctions extended to the full period by
/// h(t + π) = (-1)^k h(t) and normalized in the weighted inner product.
pub fn find_ladder(
    field: &PlaneField,
    k_max: usize,
    tol: f64,
) -> Result<Ladder, SpectrumError> {
    find_ladder_capped(field, k_max, tol, None)
}

/// As [`find_ladder`], with the geometric bracket expansion capped at
/// `lambda_cap` instead of the default `4 (k_max+1)² max([p,p'][q,q'])`.
pub fn find_ladder_capped(
    field: &PlaneField,
    k_max: usize,
    tol: f64,
    lambda_cap: Option<f64>,
) -> Result<Ladder, SpectrumError> {
    assert!(k_max >= 2, "ladder needs k_max >= 2");
    let mut records = Vec::with_capacity(2 * k_max + 1);
    records.push(kernel_record(field));
    let (one_a, one_b) = lambda_one_records(field);
    records.push(one_a);
    records.push(one_b);

    let cap = lambda_cap
        .unwrap_or_else(|| 4.0 * ((k_max + 1) as f64).powi(2) * field.max_bp_bq().max(1.0));
    let mut lambda_floor = 1.0; // λ_{k-1}^2, strictly elliptic immediately above

    for k in 2..=k_max {
        let target = k as f64 / 2.0;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let s_of = |lam: f64| -> Result<f64, SpectrumError> {
            Ok(sign * discriminant(field, lam)? - 2.0)
        };

        // one rotation bisection per canonical initial direction
        let mut stars = [0.0f64; 2];
        for (slot, beta0) in [(0usize, 0.0f64), (1usize, -PI / 2.0)] {
            let g = |lam: f64| -> Result<f64, SpectrumError> {
                Ok(half_rotation(field, lam, beta0)? - target)
            };
            let mut a = lambda_floor;
            let mut ga = g(a)?;
            let mut shrink = (10.0 * tol).max(1e-9);
            while ga >= 0.0 {
                // numerically at/above the crossing: back off toward the gap
                a -= shrink;
                shrink *= 2.0;
                ga = g(a)?;
                if a < 0.0 {
                    return Err(SpectrumError::BracketFailure { k, target, cap });
                }
            }
            let mut b = (a * 1.4 + 1.0).min(cap);
            let mut gb = g(b)?;
            while gb <= 0.0 {
                if b >= cap {
                    return Err(SpectrumError::BracketFailure { k, target, cap });
                }
                a = b;
                b = (b * 1.5 + 1.0).min(cap);
                gb = g(b)?;
            }
            let mut lo = a;
            let mut hi = b;
            for _ in 0..200 {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if g(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            stars[slot] = 0.5 * (lo + hi);
        }
        let (lam_lo, lam_hi) = if stars[0] <= stars[1] {
            (stars[0], stars[1])
        } else {
            (stars[1], stars[0])
        };

        // decide double vs split: the discriminant exceeds ±2 strictly
        // inside an instability interval, and the two bisections land on
        // opposite endpoints when the canonical directions are near the
        // parabolic eigendirections
        let s_lo = s_of(lam_lo)?;
        let s_hi = if lam_hi - lam_lo > tol { s_of(lam_hi)? } else { s_lo };
        let s_mid = if lam_hi - lam_lo > tol {
            s_of(0.5 * (lam_lo + lam_hi))?
        } else {
            s_lo
        };
        let split = s_lo.max(s_hi).max(s_mid) > SPLIT_DISCRIMINANT_THRESHOLD
            || lam_hi - lam_lo > (10.0 * tol).max(1e-8);

        let (lambda_1, lambda_2) = if split {
            let left = if s_lo > SPLIT_DISCRIMINANT_THRESHOLD {
                refine_endpoint(field, &s_of, lam_lo, lambda_floor, tol, -1.0)?
            } else {
                lam_lo
            };
            let right = if s_hi > SPLIT_DISCRIMINANT_THRESHOLD {
                refine_endpoint(field, &s_of, lam_hi, cap, tol, 1.0)?
            } else {
                lam_hi
            };
            (left, right)
        } else {
            let lam = 0.5 * (lam_lo + lam_hi);
            (lam, lam)
        };

        let double = (lambda_2 - lambda_1).abs() < 10.0 * tol;
        let ptype = if k % 2 == 0 { Periodicity::Periodic } else { Periodicity::Antiperiodic };
        let pair = extract_pair(field, k, lambda_1, lambda_2, double, tol)?;
        for (branch, (lambda, h, hw)) in pair.into_iter().enumerate() {
            records.push(EigenRecord {
                k,
                branch: branch as u8 + 1,
                lambda,
                ptype,
                double,
                h,
                hw,
            });
        }
        lambda_floor = lambda_2;
    }

    Ok(Ladder { records, k_max, tol })
}

/// Walks from a point strictly inside the instability interval to the
/// elliptic side, then bisects the discriminant crossing.
fn refine_endpoint(
    _field: &PlaneField,
    s_of: &impl Fn(f64) -> Result<f64, SpectrumError>,
    inside: f64,
    bound: f64,
    tol: f64,
    dir: f64,
) -> Result<f64, SpectrumError> {
    let mut delta = (10.0 * tol).max(1e-7 * inside.abs().max(1.0));
    let mut probe = inside + dir * delta;
    let mut s_probe = s_of(probe)?;
    while s_probe > 0.0 {
        if (dir < 0.0 && probe <= bound) || (dir > 0.0 && probe >= bound) {
            // endpoint collides with the search bound; give up refining
            return Ok(probe);
        }
        delta *= 2.0;
        probe = inside + dir * delta;
        if dir < 0.0 {
            probe = probe.max(bound);
        } else {
            probe = probe.min(bound);
        }
        s_probe = s_of(probe)?;
    }
    // bisect: s > 0 at `inside`, s <= 0 at `probe`
    let (mut neg, mut pos) = (probe, inside);
    for _ in 0..200 {
        if (neg - pos).abs() <= tol {
            break;
        }
        let mid = 0.5 * (neg + pos);
        if s_of(mid)? > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    Ok(0.5 * (neg + pos))
}

fn kernel_record(field: &PlaneField) -> EigenRecord {
    let n = field.n();
    let ones = vec![1.0; n];
    let norm = field.norm(&ones);
    EigenRecord {
        k: 0,
        branch: 1,
        lambda: 0.0,
        ptype: Periodicity::Periodic,
        double: false,
        h: vec![1.0 / norm; n],
        hw: vec![0.0; n],
    }
}

/// λ = 1 is always a double eigenvalue with the closed-form eigenspace
/// h = [v, q]; the pair is orthonormalized from the coordinate directions.
fn lambda_one_records(field: &PlaneField) -> (EigenRecord, EigenRecord) {
    let n = field.n();
    let mut h1 = Vec::with_capacity(n);
    let mut w1 = Vec::with_capacity(n);
    let mut h2 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for j in 0..n {
        let q = field.q()[j];
        let p = field.p()[j];
        // [e1, q] = q_y with derivative data w = -[e1, p]
        h1.push(q[1]);
        w1.push(-p[1]);
        h2.push(-q[0]);
        w2.push(p[0]);
    }
    let (h1, w1) = normalize_oriented(field, h1, w1);
    let (h2, w2) = orthonormalize_against(field, h2, w2, &h1, &w1);
    let record = |branch: u8, h: Vec<f64>, hw: Vec<f64>| EigenRecord {
        k: 1,
        branch,
        lambda: 1.0,
        ptype: Periodicity::Antiperiodic,
        double: true,
        h,
        hw,
    };
    (record(1, h1, w1), record(2, h2, w2))
}

fn normalize_oriented(field: &PlaneField, mut h: Vec<f64>, mut w: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let norm = field.norm(&h);
    let max = h.iter().fold(f64::MIN, |m, v| m.max(*v));
    let min = h.iter().fold(f64::MAX, |m, v| m.min(*v));
    let flip = if max < -min { -1.0 } else { 1.0 };
    for v in h.iter_mut() {
        *v *= flip / norm;
    }
    for v in w.iter_mut() {
        *v *= flip / norm;
    }
    (h, w)
}

fn orthonormalize_against(
    field: &PlaneField,
    mut h: Vec<f64>,
    mut w: Vec<f64>,
    h_ref: &[f64],
    w_ref: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let c = field.inner(&h, h_ref);
    for j in 0..h.len() {
        h[j] -= c * h_ref[j];
        w[j] -= c * w_ref[j];
    }
    normalize_oriented(field, h, w)
}

/// Integrates the two canonical columns at λ, samples them on the first
/// half grid, and extends by the parity of k.
fn extract_pair(
    field: &PlaneField,
    k: usize,
    lambda_1: f64,
    lambda_2: f64,
    double: bool,
    tol: f64,
) -> Result<Vec<(f64, Vec<f64>, Vec<f64>)>, SpectrumError> {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    if double {
        let (cols, _m) = columns_at(field, lambda_1, tol)?;
        let (ha, wa) = extend(field, &cols.0, &cols.1, sign);
        let (hb, wb) = extend(field, &cols.2, &cols.3, sign);
        let (ha, wa) = normalize_oriented(field, ha, wa);
        let (hb, wb) = orthonormalize_against(field, hb, wb, &ha, &wa);
        Ok(vec![(lambda_1, ha, wa), (lambda_2, hb, wb)])
    } else {
        let mut out = Vec::with_capacity(2);
        for lambda in [lambda_1, lambda_2] {
            let (cols, m) = columns_at(field, lambda, tol)?;
            let v = m.direction_for(sign);
            let n_half = field.n() / 2;
            let mut h_half = Vec::with_capacity(n_half);
            let mut w_half = Vec::with_capacity(n_half);
            for j in 0..n_half {
                h_half.push(v[0] * cols.0[j] + v[1] * cols.2[j]);
                w_half.push(v[0] * cols.1[j] + v[1] * cols.3[j]);
            }
            let (h, w) = extend(field, &h_half, &w_half, sign);
            let (h, w) = normalize_oriented(field, h, w);
            out.push((lambda, h, w));
        }
        Ok(out)
    }
}

type Columns = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Dense half-period transport of both canonical columns.
fn columns_at(
    field: &PlaneField,
    lambda: f64,
    tol: f64,
) -> Result<(Columns, Monodromy), SpectrumError> {
    let n_half = field.n() / 2;
    let grid = field.grid();
    let t0 = grid.origin();
    let step = grid.step();
    let outputs: Vec<f64> = (0..n_half).map(|j| t0 + j as f64 * step).collect();
    let sys = sturm::ColumnsSystem { lambda };
    let ctl = crate::ode::StepControl::with_tol(rk_tol_for(tol));
    let mut cols: Columns = (
        Vec::with_capacity(n_half),
        Vec::with_capacity(n_half),
        Vec::with_capacity(n_half),
        Vec::with_capacity(n_half),
    );
    let end = sturm::integrate_charted(
        field,
        &sys,
        t0,
        t0 + PI,
        [1.0, 0.0, 0.0, 1.0],
        &ctl,
        &outputs,
        &mut |_, _, y: &[f64; 4]| {
            cols.0.push(y[0]);
            cols.1.push(y[1]);
            cols.2.push(y[2]);
            cols.3.push(y[3]);
        },
        &mut |_, _| {},
    )?;
    let m = Monodromy {
        a11: end[0],
        a21: end[1],
        a12: end[2],
        a22: end[3],
        lambda,
        t_span: (t0, t0 + PI),
    };
    Ok((cols, m))
}

fn extend(field: &PlaneField, h_half: &[f64], w_half: &[f64], sign: f64) -> (Vec<f64>, Vec<f64>) {
    let n = field.n();
    let n_half = n / 2;
    let mut h = vec![0.0; n];
    let mut w = vec![0.0; n];
    for j in 0..n_half {
        h[j] = h_half[j];
        w[j] = w_half[j];
        h[j + n_half] = sign * h_half[j];
        w[j + n_half] = sign * w_half[j];
    }
    (h, w)
}

// ---------------------------------------------------------------------------
// λ = 1: closed-form eigenspace and its open cycloids
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LambdaOneSpace {
    /// Curvature-radius solutions r_i = [e_i, q] sampled on the grid.
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Max-norm residual of the λ=1 equation under the grid operator.
    pub ode_residual: f64,
    /// Deviation from r(t + π) = -r(t) on the grid.
    pub antiperiodicity: f64,
    /// Endpoint miss of the reconstructed curves after one turn, relative
    /// to curve diameter; the λ=1 cycloids never close.
    pub closure_miss: [f64; 2],
}

pub fn lambda_one_eigenspace(field: &PlaneField) -> LambdaOneSpace {
    let n = field.n();
    let half = n / 2;
    let r1: Vec<f64> = (0..n).map(|j| field.q()[j][1]).collect();
    let r2: Vec<f64> = (0..n).map(|j| -field.q()[j][0]).collect();

    let mut residual = 0.0f64;
    let mut antisym = 0.0f64;
    let mut closure = [0.0f64; 2];
    for (slot, r) in [&r1, &r2].into_iter().enumerate() {
        let applied = geometry::double_evolute_operator(field, r);
        for j in 0..n {
            if field.calculus().is_masked(j) {
                continue;
            }
            residual = residual.max((applied[j] - r[j]).abs());
        }
        for j in 0..half {
            antisym = antisym.max((r[j + half] + r[j]).abs());
        }
        let curve = geometry::curve_from_radius(field, r, [0.0, 0.0], 1);
        closure[slot] = curve.closure_miss_relative(field);
    }

    LambdaOneSpace { r1, r2, ode_residual: residual, antiperiodicity: antisym, closure_miss: closure }
}

// ---------------------------------------------------------------------------
// N-turn eigenvalues
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycloidKind {
    Epicycloid,
    Hypocycloid,
}

/// Double eigenvalue of the 2πN-periodic problem and one representative
/// eigenfunction (its pair spans a two-dimensional space).
#[derive(Debug, Clone)]
pub struct NTurnRecord {
    pub turns: usize,
    /// Half the cusp count; coprime with `turns`.
    pub k: usize,
    pub lambda: f64,
    pub kind: CycloidKind,
    /// Deviation of A(λ, 2π)^N from the identity (matrix max-norm).
    pub power_identity_dev: f64,
    /// Samples over the 2πN grid, unit N-turn weighted norm.
    pub h: Vec<f64>,
    pub hw: Vec<f64>,
}

/// Finds the N-1 epicycloid eigenvalues in (0, 1) and the hypocycloid
/// eigenvalues with N < k <= k_limit, gcd(k, N) = 1, inside the elliptic
/// gaps above 1.
pub fn find_n_turn(
    field: &PlaneField,
    turns: usize,
    tol: f64,
    k_limit: usize,
) -> Result<Vec<NTurnRecord>, SpectrumError> {
    assert!(turns >= 2, "N-turn search needs N >= 2");
    let mut out = Vec::new();

    // epicycloids: the rotation angle of the elliptic monodromy sweeps
    // (0, π) across the gap (0, 1); grab each multiple of π/N
    for k in 1..turns {
        let target = PI * k as f64 / turns as f64;
        let lambda = bisect_phase(field, 1e-9, 1.0 - 1e-9, target, tol)?;
        out.push(n_turn_record(field, turns, k, lambda, tol)?);
    }

    if k_limit > turns {
        let j_max = k_limit / turns + 1;
        let ladder = find_ladder(field, (j_max + 1).max(2), tol)?;
        for k in turns + 1..=k_limit {
            if gcd(k, turns) != 1 {
                continue;
            }
            let j = k / turns;
            let gap_lo = ladder.lambda(j, 2);
            let gap_hi = ladder.lambda(j + 1, 1);
            let psi = PI * (k - j * turns) as f64 / turns as f64;
            let target = if j % 2 == 0 { psi } else { PI - psi };
            let pad = (gap_hi - gap_lo) * 1e-6;
            let lambda = bisect_phase(field, gap_lo + pad, gap_hi - pad, target, tol)?;
            out.push(n_turn_record(field, turns, k, lambda, tol)?);
        }
    }
    Ok(out)
}

/// Bisects acos(trace/2) = target inside an elliptic gap; the phase is
/// monotone there because the rotation number is.
fn bisect_phase(
    field: &PlaneField,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
) -> Result<f64, SpectrumError> {
    let phase = |lam: f64| -> Result<f64, SpectrumError> {
        let tr = discriminant(field, lam)?;
        Ok((tr / 2.0).clamp(-1.0, 1.0).acos())
    };
    let f_lo = phase(lo)? - target;
    let f_hi = phase(hi)? - target;
    assert!(
        f_lo * f_hi <= 0.0,
        "phase target not bracketed in ({lo}, {hi})"
    );
    let rising = f_hi >= 0.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = phase(mid)? - target;
        if (fm < 0.0) == rising {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn n_turn_record(
    field: &PlaneField,
    turns: usize,
    k: usize,
    lambda: f64,
    tol: f64,
) -> Result<NTurnRecord, SpectrumError> {
    let t0 = field.grid().origin();
    let full = monodromy_over(field, lambda, t0, t0 + TAU, sturm::MONODROMY_RK_TOL)?;
    let mut power = full;
    for _ in 1..turns {
        power = power.matmul(&full);
    }
    let dev = power.identity_distance(1.0);

    // dense transport over all N turns from the first canonical direction
    let n = field.n();
    let total = n * turns;
    let step = field.grid().step();
    let outputs: Vec<f64> = (0..total).map(|j| t0 + j as f64 * step).collect();
    let sys = sturm::HwSystem { lambda };
    let ctl = crate::ode::StepControl::with_tol(rk_tol_for(tol));
    let mut h = Vec::with_capacity(total);
    let mut hw = Vec::with_capacity(total);
    sturm::integrate_charted(
        field,
        &sys,
        t0,
        t0 + TAU * turns as f64,
        [1.0, 0.0],
        &ctl,
        &outputs,
        &mut |_, _, y: &[f64; 2]| {
            h.push(y[0]);
            hw.push(y[1]);
        },
        &mut |_, _| {},
    )?;
    // normalize over the N-turn inner product
    let weighted: Vec<f64> = h
        .iter()
        .enumerate()
        .map(|(j, v)| v * v * field.bp()[j % n])
        .collect();
    let norm2 = field
        .calculus()
        .cumulative_at_boundary(&weighted, total, crate::grid::WeightKind::BpWeighted);
    let norm = norm2.max(f64::MIN_POSITIVE).sqrt();
    for v in h.iter_mut() {
        *v /= norm;
    }
    for v in hw.iter_mut() {
        *v /= norm;
    }

    let kind = if lambda < 1.0 { CycloidKind::Epicycloid } else { CycloidKind::Hypocycloid };
    Ok(NTurnRecord { turns, k, lambda, kind, power_identity_dev: dev, h, hw })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// gap classification and symmetry doubling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GapSample {
    pub k_below: usize,
    pub lambda: f64,
    pub tag: MonodromyTag,
}

/// Classifies sample points strictly inside each gap between consecutive
/// index pairs; the theory puts every one of them in the elliptic class.
pub fn classify_gaps(
    field: &PlaneField,
    ladder: &Ladder,
    samples_per_gap: usize,
) -> Result<Vec<GapSample>, SpectrumError> {
    let mut out = Vec::new();
    for k in 1..ladder.k_max {
        let lo = ladder.lambda(k, 2);
        let hi = ladder.lambda(k + 1, 1);
        for s in 0..samples_per_gap {
            let frac = (s + 1) as f64 / (samples_per_gap + 1) as f64;
            let lambda = lo + (hi - lo) * frac;
            let m = monodromy(field, lambda, sturm::MONODROMY_RK_TOL)?;
            out.push(GapSample {
                k_below: k,
                lambda,
                tag: classify(&m, sturm::PARABOLIC_TOL).tag,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingEntry {
    pub k: usize,
    pub gap: f64,
    /// Distance of A(λ_k, π) from -Id in the matrix max-norm.
    pub neg_identity_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    /// Whether the unit ball is quarter-turn symmetric, which forces the
    /// odd-index pairs to coincide.
    pub applicable: bool,
    pub tol: f64,
    pub entries: Vec<DoublingEntry>,
    pub pass: bool,
}

pub const DOUBLING_TOL: f64 = 1e-6;

/// Checks λ_k^1 = λ_k^2 for odd k on quarter-turn symmetric planes, along
/// with the stronger statement A(λ_k, π) = -Id behind it.  On other planes
/// the gaps are recorded as observations only.
pub fn symmetry_doubling_check(
    field: &PlaneField,
    ladder: &Ladder,
) -> Result<DoublingReport, SpectrumError> {
    let applicable = field.model().quarter_turn_symmetric();
    let mut entries = Vec::new();
    for k in (3..=ladder.k_max).step_by(2) {
        let (a, b) = ladder.pair(k);
        let gap = (b.lambda - a.lambda).abs();
        let m = monodromy(field, a.lambda, sturm::MONODROMY_RK_TOL)?;
        let dev = m.identity_distance(-1.0);
        let pass = !applicable || (gap < DOUBLING_TOL && dev < DOUBLING_TOL);
        entries.push(DoublingEntry { k, gap, neg_identity_dev: dev, pass });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(DoublingReport { applicable, tol: DOUBLING_TOL, entries, pass })
}
