//! Transport of the main second-order equation as a first-order system in
//! the plane (h, h'/[q,q']), plus monodromy matrices, rotation indices and
//! their SL2(R) classification.
//!
//! With w = h'/[q,q'] the equation becomes
//!
//! ```text
//!   h' = [q,q'] w,      w' = -λ [p,p'] h,
//! ```
//!
//! whose transport matrix has determinant one for every t and λ.  On L^p
//! planes the coefficients have integrable singularities at the axes; the
//! driver splits the span there and integrates the adjacent layers in the
//! root-substituted variable σ = dist^(1/m), where the one-forms
//! `[p,p'] dt` and `[q,q'] dt` are smooth, so the adaptive stepper keeps
//! full order across the singularity.

use crate::grid::SingularPoint;
use crate::ode::{rk45, OdeError, StepControl};
use crate::plane::PlaneField;
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub h: f64,
    pub w: f64,
}

impl StateVector {
    pub fn new(h: f64, w: f64) -> Self {
        Self { h, w }
    }
}

/// Transport matrix of (h, w) over `t_span` at spectral parameter λ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Monodromy {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub lambda: f64,
    pub t_span: (f64, f64),
}

impl Monodromy {
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn matmul(&self, other: &Monodromy) -> Monodromy {
        Monodromy {
            a11: self.a11 * other.a11 + self.a12 * other.a21,
            a12: self.a11 * other.a12 + self.a12 * other.a22,
            a21: self.a21 * other.a11 + self.a22 * other.a21,
            a22: self.a21 * other.a12 + self.a22 * other.a22,
            lambda: self.lambda,
            t_span: (other.t_span.0, self.t_span.1),
        }
    }

    pub fn identity_distance(&self, sign: f64) -> f64 {
        (self.a11 - sign)
            .abs()
            .max((self.a22 - sign).abs())
            .max(self.a12.abs())
            .max(self.a21.abs())
    }

    /// Eigenvector for the eigenvalue closest to `mu` (`±1` for parabolic
    /// extraction, or a real hyperbolic eigenvalue).
    pub fn direction_for(&self, mu: f64) -> [f64; 2] {
        // rows of A - mu I; the null direction from the larger row
        let r1 = [self.a11 - mu, self.a12];
        let r2 = [self.a21, self.a22 - mu];
        let n1 = r1[0] * r1[0] + r1[1] * r1[1];
        let n2 = r2[0] * r2[0] + r2[1] * r2[1];
        let v = if n1 >= n2 { [-r1[1], r1[0]] } else { [-r2[1], r2[0]] };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if n == 0.0 {
            [1.0, 0.0] // A = mu·Id: any direction
        } else {
            [v[0] / n, v[1] / n]
        }
    }

    /// Real eigenvalues (|trace| >= 2), larger magnitude first.
    pub fn real_eigenvalues(&self) -> Option<(f64, f64)> {
        let tr = self.trace();
        let disc = tr * tr - 4.0 * self.det();
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let big = 0.5 * (tr + tr.signum() * s);
        Some((big, self.det() / big))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonodromyTag {
    EllipticM0,
    HyperbolicPlus,
    HyperbolicMinus,
    ParabolicPlusOne,
    ParabolicMinusOne,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonodromyClass {
    pub tag: MonodromyTag,
    /// Elliptic rotation angle φ with trace = 2 cos φ; 0 otherwise.
    pub rotation: f64,
}

/// Classifies a monodromy by its trace, with a parabolic band of width
/// `tol` around ±2.
pub fn classify(m: &Monodromy, tol: f64) -> MonodromyClass {
    let tr = m.trace();
    if (tr - 2.0).abs() <= tol {
        return MonodromyClass { tag: MonodromyTag::ParabolicPlusOne, rotation: 0.0 };
    }
    if (tr + 2.0).abs() <= tol {
        return MonodromyClass { tag: MonodromyTag::ParabolicMinusOne, rotation: 0.0 };
    }
    if tr > 2.0 {
        MonodromyClass { tag: MonodromyTag::HyperbolicPlus, rotation: 0.0 }
    } else if tr < -2.0 {
        MonodromyClass { tag: MonodromyTag::HyperbolicMinus, rotation: 0.0 }
    } else {
        MonodromyClass { tag: MonodromyTag::EllipticM0, rotation: (tr / 2.0).acos() }
    }
}

pub const PARABOLIC_TOL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// charted integration driver
// ---------------------------------------------------------------------------

/// Right-hand sides driven by the coefficient one-forms.  `bp_w` and `bq_w`
/// are `[p,p']·dt/dξ` and `[q,q']·dt/dξ` in the current chart variable ξ,
/// so implementations never see a singular value.
pub(crate) trait SlSystem<const D: usize> {
    fn rhs(&self, t: f64, bp_w: f64, bq_w: f64, y: &[f64; D]) -> [f64; D];
}

pub(crate) struct HwSystem {
    pub lambda: f64,
}

impl SlSystem<2> for HwSystem {
    fn rhs(&self, _t: f64, bp_w: f64, bq_w: f64, y: &[f64; 2]) -> [f64; 2] {
        [bq_w * y[1], -self.lambda * bp_w * y[0]]
    }
}

pub(crate) struct ColumnsSystem {
    pub lambda: f64,
}

impl SlSystem<4> for ColumnsSystem {
    fn rhs(&self, _t: f64, bp_w: f64, bq_w: f64, y: &[f64; 4]) -> [f64; 4] {
        [
            bq_w * y[1],
            -self.lambda * bp_w * y[0],
            bq_w * y[3],
            -self.lambda * bp_w * y[2],
        ]
    }
}

/// Clockwise phase angle of (h, w); dβ/dt = λ[p,p']cos²β + [q,q']sin²β > 0
/// for λ > 0, which is what makes the rotation index monotone in λ.
pub(crate) struct AngleSystem {
    pub lambda: f64,
}

impl SlSystem<1> for AngleSystem {
    fn rhs(&self, _t: f64, bp_w: f64, bq_w: f64, y: &[f64; 1]) -> [f64; 1] {
        let (s, c) = y[0].sin_cos();
        [self.lambda * bp_w * c * c + bq_w * s * s]
    }
}

#[cfg(test)]
pub(crate) struct HwAngleSystem {
    pub lambda: f64,
}

#[cfg(test)]
impl SlSystem<3> for HwAngleSystem {
    fn rhs(&self, _t: f64, bp_w: f64, bq_w: f64, y: &[f64; 3]) -> [f64; 3] {
        let (s, c) = y[2].sin_cos();
        [
            bq_w * y[1],
            -self.lambda * bp_w * y[0],
            self.lambda * bp_w * c * c + bq_w * s * s,
        ]
    }
}

const LAYER_HALF_WIDTH: f64 = 0.35;
const SINGULAR_SNAP: f64 = 1e-9;

/// Integrates a coefficient-driven system over `[t0, t1]` (forward), hitting
/// `outputs` exactly and switching to σ-charts next to each singular point.
pub(crate) fn integrate_charted<const D: usize, S: SlSystem<D>>(
    field: &PlaneField,
    sys: &S,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    ctl: &StepControl,
    outputs: &[f64],
    on_output: &mut impl FnMut(usize, f64, &[f64; D]),
    on_step: &mut impl FnMut(f64, &[f64; D]),
) -> Result<[f64; D], OdeError> {
    assert!(t1 >= t0, "charted integration runs forward");

    // replicate singular points over the span (plus one beyond each end so
    // layers next to the endpoints are recognized)
    let mut breaks: Vec<(f64, SingularPoint)> = Vec::new();
    for sp in field.singular_points() {
        let mut s = sp.t + TAU * ((t0 - sp.t) / TAU).floor() - TAU;
        while s <= t1 + LAYER_HALF_WIDTH {
            if s >= t0 - LAYER_HALF_WIDTH {
                breaks.push((s, *sp));
            }
            s += TAU;
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    enum Chart {
        Direct,
        Layer { sp: SingularPoint, anchor: f64, side: f64 },
    }

    // walk the span, emitting direct pieces and layers around each singular
    // parameter: descending (side -1) on approach, ascending (side +1) after
    let mut pieces: Vec<(f64, f64, Chart)> = Vec::new();
    let mut cursor = t0;
    let mut i = 0usize;
    while breaks.get(i).map(|(s, _)| *s < cursor - SINGULAR_SNAP).unwrap_or(false) {
        // singular point behind the start but within layer reach: begin in
        // its ascending chart
        let (s, sp) = breaks[i];
        if cursor - s < LAYER_HALF_WIDTH {
            let reach = (s + LAYER_HALF_WIDTH).min(t1);
            if reach - cursor > SINGULAR_SNAP {
                pieces.push((cursor, reach, Chart::Layer { sp, anchor: s, side: 1.0 }));
                cursor = reach;
            }
        }
        i += 1;
    }
    while cursor < t1 - SINGULAR_SNAP {
        match breaks.get(i).copied() {
            Some((s, sp)) => {
                if (s - cursor).abs() <= SINGULAR_SNAP {
                    // departing from the singular point: ascending layer
                    let mut reach = LAYER_HALF_WIDTH.min(t1 - s);
                    if let Some((s_next, _)) = breaks.get(i + 1) {
                        reach = reach.min((s_next - s) / 2.0);
                    }
                    if reach > SINGULAR_SNAP {
                        pieces.push((s, s + reach, Chart::Layer { sp, anchor: s, side: 1.0 }));
                        cursor = s + reach;
                    }
                    i += 1;
                } else {
                    // approach the singular point (or the end of the span)
                    let target = s.min(t1);
                    let layer_start = (s - LAYER_HALF_WIDTH).max(cursor).min(target);
                    if layer_start - cursor > SINGULAR_SNAP {
                        pieces.push((cursor, layer_start, Chart::Direct));
                    }
                    if target - layer_start > SINGULAR_SNAP {
                        pieces.push((
                            layer_start,
                            target,
                            Chart::Layer { sp, anchor: s, side: -1.0 },
                        ));
                    }
                    cursor = target;
                }
            }
            None => {
                pieces.push((cursor, t1, Chart::Direct));
                cursor = t1;
            }
        }
    }

    // run the pieces
    let mut y = y0;
    let mut out_idx = 0usize;
    for (a, b, chart) in pieces {
        // outputs inside this piece
        let lo = out_idx;
        while out_idx < outputs.len() && outputs[out_idx] <= b + SINGULAR_SNAP {
            out_idx += 1;
        }
        let outs = &outputs[lo..out_idx];
        match chart {
            Chart::Direct => {
                let mut f = |t: f64, y: &[f64; D]| sys.rhs(t, field.bp_at(t), field.bq_at(t), y);
                let mut emit = |i: usize, t: f64, y: &[f64; D]| on_output(lo + i, t, y);
                y = rk45(&mut f, (a, b), y, ctl, outs, &mut emit, on_step)?;
            }
            Chart::Layer { sp, anchor, side } => {
                // anchor is the singular parameter (mod 2π shifts); the
                // chart coordinate is σ = |t - anchor|^(1/m)
                let m = sp.root;
                let sp_shifted = SingularPoint { t: anchor, ..sp };
                let to_sigma = |t: f64| ((t - anchor) * side).max(0.0).powf(1.0 / m);
                let (s0, s1) = (to_sigma(a), to_sigma(b));
                let sig_outs: Vec<f64> = outs.iter().map(|&t| to_sigma(t)).collect();
                let mut f = |sg: f64, y: &[f64; D]| {
                    let (bp_w, bq_w, t) = field.layer_coeffs(&sp_shifted, side, sg.max(0.0));
                    let mut dy = sys.rhs(t, bp_w, bq_w, y);
                    if side < 0.0 {
                        for v in dy.iter_mut() {
                            *v = -*v;
                        }
                    }
                    dy
                };
                let mut emit = |i: usize, sg: f64, y: &[f64; D]| {
                    let t = anchor + side * sg.powf(m);
                    on_output(lo + i, t, y);
                };
                let mut step = |sg: f64, y: &[f64; D]| {
                    let t = anchor + side * sg.max(0.0).powf(m);
                    on_step(t, y);
                };
                y = rk45(&mut f, (s0, s1), y, ctl, &sig_outs, &mut emit, &mut step)?;
            }
        }
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub h: f64,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct SlSolution {
    pub endpoint: StateVector,
    pub samples: Vec<TrajectoryPoint>,
}

/// Advances the system from `t0` to `t1` with local error control at `tol`.
/// With `dense` set, the solution is also sampled at every grid node inside
/// the span.
pub fn integrate(
    field: &PlaneField,
    lambda: f64,
    init: StateVector,
    t0: f64,
    t1: f64,
    tol: f64,
    dense: bool,
) -> Result<SlSolution, OdeError> {
    let ctl = StepControl::with_tol(tol);
    let sys = HwSystem { lambda };
    let outputs = if dense { grid_nodes_in(field, t0, t1) } else { Vec::new() };
    let mut samples = Vec::with_capacity(outputs.len());
    let end = integrate_charted(
        field,
        &sys,
        t0,
        t1,
        [init.h, init.w],
        &ctl,
        &outputs,
        &mut |_, t, y| samples.push(TrajectoryPoint { t, h: y[0], w: y[1] }),
        &mut |_, _| {},
    )?;
    Ok(SlSolution { endpoint: StateVector::new(end[0], end[1]), samples })
}

fn grid_nodes_in(field: &PlaneField, t0: f64, t1: f64) -> Vec<f64> {
    let step = field.grid().step();
    let first = ((t0 - field.grid().origin()) / step).ceil() as i64;
    let mut out = Vec::new();
    let mut j = first;
    loop {
        let t = field.grid().origin() + j as f64 * step;
        if t > t1 + 1e-12 {
            break;
        }
        if t >= t0 - 1e-12 {
            out.push(t);
        }
        j += 1;
    }
    out
}

/// Transport matrix over one half period `[t_off, t_off + π]` starting at
/// the staggered-grid origin, assembled from the two canonical columns.
/// No renormalization is applied; `det - 1` is a quality signal.
pub fn monodromy(field: &PlaneField, lambda: f64, tol: f64) -> Result<Monodromy, OdeError> {
    let t0 = field.grid().origin();
    monodromy_over(field, lambda, t0, t0 + std::f64::consts::PI, tol)
}

/// Transport matrix over an arbitrary forward span.
pub fn monodromy_over(
    field: &PlaneField,
    lambda: f64,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Monodromy, OdeError> {
    let ctl = StepControl::with_tol(tol);
    let sys = ColumnsSystem { lambda };
    let y = integrate_charted(
        field,
        &sys,
        t0,
        t1,
        [1.0, 0.0, 0.0, 1.0],
        &ctl,
        &[],
        &mut |_, _, _| {},
        &mut |_, _| {},
    )?;
    Ok(Monodromy {
        a11: y[0],
        a21: y[1],
        a12: y[2],
        a22: y[3],
        lambda,
        t_span: (t0, t1),
    })
}

/// Total clockwise turning of the phase vector (h, w) over `[0, 2π]`, in
/// turns; positive and strictly increasing in λ for λ > 0.
pub fn rotation_index(field: &PlaneField, lambda: f64, init: StateVector) -> Result<f64, OdeError> {
    assert!(
        init.h != 0.0 || init.w != 0.0,
        "rotation index needs a nonzero initial direction"
    );
    rotation_over(field, lambda, beta_of(init), 0.0, TAU)
}

pub(crate) fn beta_of(init: StateVector) -> f64 {
    -init.w.atan2(init.h)
}

/// Rotation in turns over an arbitrary forward span, from phase angle β0.
pub(crate) fn rotation_over(
    field: &PlaneField,
    lambda: f64,
    beta0: f64,
    t0: f64,
    t1: f64,
) -> Result<f64, OdeError> {
    let ctl = StepControl::with_tol(ROTATION_RK_TOL);
    let sys = AngleSystem { lambda };
    let y = integrate_charted(
        field,
        &sys,
        t0,
        t1,
        [beta0],
        &ctl,
        &[],
        &mut |_, _, _| {},
        &mut |_, _| {},
    )?;
    Ok((y[0] - beta0) / TAU)
}

pub(crate) const ROTATION_RK_TOL: f64 = 3e-12;
pub(crate) const MONODROMY_RK_TOL: f64 = 1e-12;

/// Norm growth factors of repeated application of A to its expanding
/// direction; hyperbolic monodromies grow geometrically.
pub fn expanding_growth_factors(m: &Monodromy, applications: usize) -> Vec<f64> {
    let mu = match m.real_eigenvalues() {
        Some((big, _)) => big,
        None => return Vec::new(),
    };
    let mut v = m.direction_for(mu);
    let mut out = Vec::with_capacity(applications);
    for _ in 0..applications {
        let next = m.apply(v);
        let n_prev = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let n_next = (next[0] * next[0] + next[1] * next[1]).sqrt();
        out.push(n_next / n_prev);
        v = [next[0] / n_next, next[1] / n_next];
        // renormalized to dodge overflow over many applications
    }
    out
}
