//! Normed-plane models, their unit-circle parameterizations and the sampled
//! coefficient fields used by every other module.
//!
//! A plane is described by a [`PlaneModel`] (family + parameters).  Building
//! it produces a [`PlaneField`]: the primal parameterization `p`, the dual
//! parameterization `q = p'/[p,p']`, their derivatives, and the two bracket
//! fields `[p,p']` and `[q,q']` sampled on a staggered uniform grid.  The
//! L^p family with `p ≠ 2` degenerates at the axes (`[p,p']` blows up
//! integrably on one side of 2 while `[q,q']` vanishes, and vice versa); the
//! field records those points so quadrature, differentiation and the ODE
//! transport can switch to root-substituted coordinates near them.

use crate::grid::{Calculus, Grid, SingularPoint, WeightKind};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlaneError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("grid too coarse: duality residual {residual:.3e} exceeds {tol:.1e}")]
    GridTooCoarse { residual: f64, tol: f64 },
}

/// One harmonic of a support-function model; only even `k ≥ 2` are legal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FourierTerm {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

/// Families of symmetric unit circles supported in closed form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PlaneFamily {
    Euclidean,
    Lp { p: f64 },
    Ellipse { a: f64, b: f64 },
    Fourier { a0: f64, terms: Vec<FourierTerm> },
}

/// Symbolic description of a normed plane's unit circle.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlaneModel {
    #[serde(flatten)]
    pub family: PlaneFamily,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl PlaneModel {
    pub fn euclidean() -> Self {
        Self { family: PlaneFamily::Euclidean, label: String::new() }
    }

    pub fn lp(p: f64) -> Self {
        Self { family: PlaneFamily::Lp { p }, label: String::new() }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self { family: PlaneFamily::Ellipse { a, b }, label: String::new() }
    }

    pub fn fourier(a0: f64, terms: Vec<FourierTerm>) -> Self {
        Self { family: PlaneFamily::Fourier { a0, terms }, label: String::new() }
    }

    /// Convexity/positivity checks; a rejected model never reaches a field.
    pub fn validate(&self) -> Result<(), PlaneError> {
        match &self.family {
            PlaneFamily::Euclidean => Ok(()),
            PlaneFamily::Lp { p } => {
                if !p.is_finite() || *p <= 1.0 {
                    return Err(PlaneError::InvalidModel(format!(
                        "lp ball requires exponent > 1, got {p}"
                    )));
                }
                Ok(())
            }
            PlaneFamily::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(PlaneError::InvalidModel(format!(
                        "ellipse semi-axes must be positive, got ({a}, {b})"
                    )));
                }
                Ok(())
            }
            PlaneFamily::Fourier { a0, terms } => {
                for t in terms {
                    if t.k < 2 || t.k % 2 != 0 {
                        return Err(PlaneError::InvalidModel(format!(
                            "support harmonics must have even index >= 2, got k={}",
                            t.k
                        )));
                    }
                    if !(t.a.is_finite() && t.b.is_finite()) {
                        return Err(PlaneError::InvalidModel("non-finite coefficient".into()));
                    }
                }
                if !a0.is_finite() {
                    return Err(PlaneError::InvalidModel("non-finite a0".into()));
                }
                // positivity and quadratic convexity on a validation grid
                let m = 4096;
                for j in 0..m {
                    let t = j as f64 / m as f64 * TAU;
                    let h = support_eval(*a0, terms, t, 0);
                    let hpp = support_eval(*a0, terms, t, 2);
                    if h <= 0.0 {
                        return Err(PlaneError::InvalidModel(format!(
                            "support function not positive at t={t:.4}"
                        )));
                    }
                    if h + hpp <= 0.0 {
                        return Err(PlaneError::InvalidModel(format!(
                            "quadratic convexity H + H'' > 0 fails at t={t:.4}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether the unit ball is invariant under a quarter-turn rotation
    /// (decides the odd-index eigenvalue doubling check).
    pub fn quarter_turn_symmetric(&self) -> bool {
        match &self.family {
            PlaneFamily::Euclidean => true,
            PlaneFamily::Lp { .. } => true,
            PlaneFamily::Ellipse { .. } => false,
            PlaneFamily::Fourier { terms, .. } => terms.iter().all(|t| t.k % 4 == 0),
        }
    }

    fn lp_exponent(&self) -> Option<f64> {
        match self.family {
            PlaneFamily::Lp { p } if (p - 2.0).abs() > 1e-12 => Some(p),
            _ => None,
        }
    }
}

/// Value of `H`, or one of its derivatives, for a support-function model.
fn support_eval(a0: f64, terms: &[FourierTerm], t: f64, order: u32) -> f64 {
    let mut acc = if order == 0 { a0 } else { 0.0 };
    for term in terms {
        let k = term.k as f64;
        let kt = k * t;
        let scale = k.powi(order as i32);
        let (ca, cb) = match order % 4 {
            0 => (kt.cos(), kt.sin()),
            1 => (-kt.sin(), kt.cos()),
            2 => (-kt.cos(), -kt.sin()),
            _ => (kt.sin(), -kt.cos()),
        };
        acc += scale * (term.a * ca + term.b * cb);
    }
    acc
}

fn sgn_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Whether the samples describe the plane itself or its dual (evolutes live
/// in the dual; a second dualization returns, up to the antipodal map).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Primal,
    Dual,
}

#[derive(Clone, Copy)]
enum CoeffSource {
    ClosedForm,
    Sampled,
}

/// Sampled parameterizations and bracket fields of one plane.
///
/// Immutable after construction; all methods are pure.
pub struct PlaneField {
    model: PlaneModel,
    role: Role,
    grid: Grid,
    p: Vec<[f64; 2]>,
    dp: Vec<[f64; 2]>,
    q: Vec<[f64; 2]>,
    dq: Vec<[f64; 2]>,
    bp: Vec<f64>,
    bq: Vec<f64>,
    singular_nodes: Vec<usize>,
    singular_points: Vec<SingularPoint>,
    calculus: Calculus,
    source: CoeffSource,
    max_bp_bq: f64,
}

const DUALITY_BUILD_TOL: f64 = 1e-6;

/// Builds the sampled field of a model on an `n`-point grid.
pub fn build_plane(model: &PlaneModel, n: usize) -> Result<PlaneField, PlaneError> {
    model.validate()?;
    let grid = Grid::new(n).ok_or_else(|| {
        PlaneError::InvalidModel(format!("grid size must be a power of two >= 64, got {n}"))
    })?;
    PlaneField::from_closed_forms(model.clone(), Role::Primal, grid)
}

impl PlaneField {
    fn from_closed_forms(model: PlaneModel, role: Role, grid: Grid) -> Result<Self, PlaneError> {
        let n = grid.len();
        let half = grid.half_shift();
        let forms = Forms { model: &model, role };

        let mut p = vec![[0.0; 2]; n];
        let mut dp = vec![[0.0; 2]; n];
        let mut q = vec![[0.0; 2]; n];
        let mut dq = vec![[0.0; 2]; n];
        let mut bp = vec![0.0; n];
        let mut bq = vec![0.0; n];
        for j in 0..half {
            let t = grid.node(j);
            p[j] = forms.p(t);
            dp[j] = forms.dp(t);
            q[j] = forms.q(t);
            dq[j] = forms.dq(t);
            bp[j] = forms.bp(t);
            bq[j] = forms.bq(t);
            // central symmetry: mirror the second half exactly
            p[j + half] = [-p[j][0], -p[j][1]];
            dp[j + half] = [-dp[j][0], -dp[j][1]];
            q[j + half] = [-q[j][0], -q[j][1]];
            dq[j + half] = [-dq[j][0], -dq[j][1]];
            bp[j + half] = bp[j];
            bq[j + half] = bq[j];
        }

        let singular_points = singular_points_of(&model, role);
        let singular_nodes = nearest_nodes(&grid, &singular_points);
        let calculus = Calculus::build(grid, &singular_points);

        let field = Self {
            max_bp_bq: bp.iter().zip(&bq).map(|(a, b)| a * b).fold(0.0, f64::max),
            model,
            role,
            grid,
            p,
            dp,
            q,
            dq,
            bp,
            bq,
            singular_nodes,
            singular_points,
            calculus,
            source: CoeffSource::ClosedForm,
        };
        field.check_duality()?;
        Ok(field)
    }

    /// Builds a field from raw unit-circle samples, deriving the dual data
    /// spectrally.  Only smooth families make sense here; coefficient
    /// evaluation between nodes falls back to periodic cubic interpolation.
    pub fn from_circle_samples(
        model: PlaneModel,
        n: usize,
        p: Vec<[f64; 2]>,
    ) -> Result<Self, PlaneError> {
        model.validate()?;
        if model.lp_exponent().is_some() {
            return Err(PlaneError::InvalidModel(
                "sampled construction requires a smooth family".into(),
            ));
        }
        let grid = Grid::new(n).ok_or_else(|| {
            PlaneError::InvalidModel(format!("grid size must be a power of two >= 64, got {n}"))
        })?;
        if p.len() != n {
            return Err(PlaneError::InvalidModel("sample count must equal grid size".into()));
        }
        let comp = |v: &[[f64; 2]], i: usize| -> Vec<f64> { v.iter().map(|x| x[i]).collect() };
        let deriv2 = |v: &[[f64; 2]]| -> Vec<[f64; 2]> {
            let dx = crate::grid::spectral_derivative(&comp(v, 0));
            let dy = crate::grid::spectral_derivative(&comp(v, 1));
            dx.into_iter().zip(dy).map(|(x, y)| [x, y]).collect()
        };
        let dp = deriv2(&p);
        let bp: Vec<f64> = p.iter().zip(&dp).map(|(a, b)| cross(*a, *b)).collect();
        if bp.iter().any(|v| *v <= 0.0) {
            return Err(PlaneError::InvalidModel("sampled circle is not locally convex".into()));
        }
        let q: Vec<[f64; 2]> = dp
            .iter()
            .zip(&bp)
            .map(|(d, w)| [d[0] / w, d[1] / w])
            .collect();
        let dq = deriv2(&q);
        let bq: Vec<f64> = q.iter().zip(&dq).map(|(a, b)| cross(*a, *b)).collect();
        let calculus = Calculus::build(grid, &[]);
        let field = Self {
            max_bp_bq: bp.iter().zip(&bq).map(|(a, b)| a * b).fold(0.0, f64::max),
            model,
            role: Role::Primal,
            grid,
            p,
            dp,
            q,
            dq,
            bp,
            bq,
            singular_nodes: Vec::new(),
            singular_points: Vec::new(),
            calculus,
            source: CoeffSource::Sampled,
        };
        field.check_duality()?;
        Ok(field)
    }

    fn check_duality(&self) -> Result<(), PlaneError> {
        let mut worst = 0.0f64;
        for j in 0..self.grid.len() {
            if self.calculus.is_masked(j) {
                continue;
            }
            worst = worst.max((cross(self.p[j], self.q[j]) - 1.0).abs());
        }
        if worst > DUALITY_BUILD_TOL {
            return Err(PlaneError::GridTooCoarse { residual: worst, tol: DUALITY_BUILD_TOL });
        }
        Ok(())
    }

    /// The same plane with the primal/dual roles exchanged: the unit circle
    /// becomes `q` and the dual parameterization `-p`, so the bracket fields
    /// swap.  Used by evolute bookkeeping.
    pub fn dual(&self) -> PlaneField {
        let neg = |v: &[[f64; 2]]| -> Vec<[f64; 2]> { v.iter().map(|x| [-x[0], -x[1]]).collect() };
        let singular_points: Vec<SingularPoint> = self
            .singular_points
            .iter()
            .map(|sp| SingularPoint {
                t: sp.t,
                bp_exponent: sp.bq_exponent,
                bq_exponent: sp.bp_exponent,
                root: sp.root,
            })
            .collect();
        let calculus = Calculus::build(self.grid, &singular_points);
        PlaneField {
            model: self.model.clone(),
            role: match self.role {
                Role::Primal => Role::Dual,
                Role::Dual => Role::Primal,
            },
            grid: self.grid,
            p: self.q.clone(),
            dp: self.dq.clone(),
            q: neg(&self.p),
            dq: neg(&self.dp),
            bp: self.bq.clone(),
            bq: self.bp.clone(),
            singular_nodes: self.singular_nodes.clone(),
            singular_points,
            calculus,
            source: self.source,
            max_bp_bq: self.max_bp_bq,
        }
    }

    pub fn model(&self) -> &PlaneModel {
        &self.model
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn calculus(&self) -> &Calculus {
        &self.calculus
    }

    pub fn p(&self) -> &[[f64; 2]] {
        &self.p
    }

    pub fn dp(&self) -> &[[f64; 2]] {
        &self.dp
    }

    pub fn q(&self) -> &[[f64; 2]] {
        &self.q
    }

    pub fn dq(&self) -> &[[f64; 2]] {
        &self.dq
    }

    pub fn bp(&self) -> &[f64] {
        &self.bp
    }

    pub fn bq(&self) -> &[f64] {
        &self.bq
    }

    pub fn singular_nodes(&self) -> &[usize] {
        &self.singular_nodes
    }

    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular_points
    }

    pub fn max_bp_bq(&self) -> f64 {
        self.max_bp_bq
    }

    /// Weighted inner product `∫ f g [p,p'] dt` of two sample vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let w: Vec<f64> = f
            .iter()
            .zip(g)
            .zip(&self.bp)
            .map(|((a, b), c)| a * b * c)
            .collect();
        self.calculus.integrate(&w, WeightKind::BpWeighted)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    // --- pointwise coefficient evaluation (continuous parameter) ---

    pub fn bp_at(&self, t: f64) -> f64 {
        match self.source {
            CoeffSource::ClosedForm => Forms { model: &self.model, role: self.role }.bp(t),
            CoeffSource::Sampled => cubic_interp(&self.grid, &self.bp, t),
        }
    }

    pub fn bq_at(&self, t: f64) -> f64 {
        match self.source {
            CoeffSource::ClosedForm => Forms { model: &self.model, role: self.role }.bq(t),
            CoeffSource::Sampled => cubic_interp(&self.grid, &self.bq, t),
        }
    }

    pub fn p_at(&self, t: f64) -> [f64; 2] {
        match self.source {
            CoeffSource::ClosedForm => Forms { model: &self.model, role: self.role }.p(t),
            CoeffSource::Sampled => cubic_interp2(&self.grid, &self.p, t),
        }
    }

    pub fn q_at(&self, t: f64) -> [f64; 2] {
        match self.source {
            CoeffSource::ClosedForm => Forms { model: &self.model, role: self.role }.q(t),
            CoeffSource::Sampled => cubic_interp2(&self.grid, &self.q, t),
        }
    }

    /// Chart data for integrating across a singular point: at distance
    /// `d = σ^root` on the given side, returns the transported coefficient
    /// one-forms `[p,p']·dt/dσ`, `[q,q']·dt/dσ` and the parameter t itself,
    /// all finite down to σ = 0.
    pub fn layer_coeffs(&self, sp: &SingularPoint, side: f64, sigma: f64) -> (f64, f64, f64) {
        let m = sp.root;
        let d = sigma.powf(m);
        let t = sp.t + side * d;
        let p = match self.model.lp_exponent() {
            Some(p) => p,
            None => unreachable!("layer charts exist only for singular families"),
        };
        let qc = p / (p - 1.0);
        let (cp, cq) = match self.role {
            Role::Primal => (2.0 / p, 2.0 / qc),
            Role::Dual => (2.0 / qc, 2.0 / p),
        };
        // |cos t sin t| = d * g(d) with smooth positive g
        let g = sinc(d) * d.cos().abs();
        let ep = cp - 1.0;
        let eq = cq - 1.0;
        let bp_w = cp * g.powf(ep) * m * sigma.powf(m * (1.0 + ep) - 1.0);
        let bq_w = cq * g.powf(eq) * m * sigma.powf(m * (1.0 + eq) - 1.0);
        (bp_w, bq_w, t)
    }
}

fn sinc(d: f64) -> f64 {
    if d.abs() < 1e-8 {
        1.0 - d * d / 6.0
    } else {
        d.sin() / d
    }
}

pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn cubic_interp(grid: &Grid, f: &[f64], t: f64) -> f64 {
    let n = grid.len() as isize;
    let x = t / grid.step() - 0.5; // node coordinate
    let j0 = x.floor() as isize;
    let frac = x - j0 as f64;
    let y: Vec<f64> = (-1..3)
        .map(|o| f[(j0 + o).rem_euclid(n) as usize])
        .collect();
    // 4-point Lagrange at offsets -1, 0, 1, 2
    let u = frac;
    let w = [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ];
    w.iter().zip(&y).map(|(a, b)| a * b).sum()
}

fn cubic_interp2(grid: &Grid, f: &[[f64; 2]], t: f64) -> [f64; 2] {
    let xs: Vec<f64> = f.iter().map(|v| v[0]).collect();
    let ys: Vec<f64> = f.iter().map(|v| v[1]).collect();
    [cubic_interp(grid, &xs, t), cubic_interp(grid, &ys, t)]
}

fn singular_points_of(model: &PlaneModel, role: Role) -> Vec<SingularPoint> {
    let Some(p) = model.lp_exponent() else {
        return Vec::new();
    };
    let qc = p / (p - 1.0);
    let (ep, eq) = match role {
        Role::Primal => (2.0 / p - 1.0, 2.0 / qc - 1.0),
        Role::Dual => (2.0 / qc - 1.0, 2.0 / p - 1.0),
    };
    let root = p.max(qc);
    (0..4)
        .map(|k| SingularPoint {
            t: k as f64 * FRAC_PI_2,
            bp_exponent: ep,
            bq_exponent: eq,
            root,
        })
        .collect()
}

fn nearest_nodes(grid: &Grid, pts: &[SingularPoint]) -> Vec<usize> {
    let mut out = Vec::new();
    for sp in pts {
        let b = (sp.t / grid.step()).round() as isize;
        out.push(grid.wrap(b - 1));
        out.push(grid.wrap(b));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Closed-form evaluators for one model and role.
struct Forms<'a> {
    model: &'a PlaneModel,
    role: Role,
}

impl Forms<'_> {
    fn p(&self, t: f64) -> [f64; 2] {
        match self.role {
            Role::Primal => primal_p(self.model, t),
            Role::Dual => primal_q(self.model, t),
        }
    }

    fn dp(&self, t: f64) -> [f64; 2] {
        match self.role {
            Role::Primal => primal_dp(self.model, t),
            Role::Dual => primal_dq(self.model, t),
        }
    }

    fn q(&self, t: f64) -> [f64; 2] {
        match self.role {
            Role::Primal => primal_q(self.model, t),
            Role::Dual => {
                let v = primal_p(self.model, t);
                [-v[0], -v[1]]
            }
        }
    }

    fn dq(&self, t: f64) -> [f64; 2] {
        match self.role {
            Role::Primal => primal_dq(self.model, t),
            Role::Dual => {
                let v = primal_dp(self.model, t);
                [-v[0], -v[1]]
            }
        }
    }

    fn bp(&self, t: f64) -> f64 {
        match self.role {
            Role::Primal => primal_bp(self.model, t),
            Role::Dual => primal_bq(self.model, t),
        }
    }

    fn bq(&self, t: f64) -> f64 {
        match self.role {
            Role::Primal => primal_bq(self.model, t),
            Role::Dual => primal_bp(self.model, t),
        }
    }
}

fn primal_p(model: &PlaneModel, t: f64) -> [f64; 2] {
    let (c, s) = (t.cos(), t.sin());
    match &model.family {
        PlaneFamily::Euclidean => [c, s],
        PlaneFamily::Lp { p } => [sgn_pow(c, 2.0 / p), sgn_pow(s, 2.0 / p)],
        PlaneFamily::Ellipse { a, b } => [a * c, b * s],
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            let hp = support_eval(*a0, terms, t, 1);
            [h * c - hp * s, h * s + hp * c]
        }
    }
}

fn primal_dp(model: &PlaneModel, t: f64) -> [f64; 2] {
    let (c, s) = (t.cos(), t.sin());
    match &model.family {
        PlaneFamily::Euclidean => [-s, c],
        PlaneFamily::Lp { p } => {
            let e = 2.0 / p;
            [-e * c.abs().powf(e - 1.0) * s, e * s.abs().powf(e - 1.0) * c]
        }
        PlaneFamily::Ellipse { a, b } => [-a * s, b * c],
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            let hpp = support_eval(*a0, terms, t, 2);
            [-(h + hpp) * s, (h + hpp) * c]
        }
    }
}

fn primal_q(model: &PlaneModel, t: f64) -> [f64; 2] {
    let (c, s) = (t.cos(), t.sin());
    match &model.family {
        PlaneFamily::Euclidean => [-s, c],
        PlaneFamily::Lp { p } => {
            let e = 2.0 * (1.0 - 1.0 / p); // 2/q with the conjugate exponent
            [-sgn_pow(s, e), sgn_pow(c, e)]
        }
        PlaneFamily::Ellipse { a, b } => [-s / b, c / a],
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            [-s / h, c / h]
        }
    }
}

fn primal_dq(model: &PlaneModel, t: f64) -> [f64; 2] {
    let (c, s) = (t.cos(), t.sin());
    match &model.family {
        PlaneFamily::Euclidean => [-c, -s],
        PlaneFamily::Lp { p } => {
            let e = 2.0 * (1.0 - 1.0 / p);
            [-e * s.abs().powf(e - 1.0) * c, -e * c.abs().powf(e - 1.0) * s]
        }
        PlaneFamily::Ellipse { a, b } => [-c / b, -s / a],
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            let hp = support_eval(*a0, terms, t, 1);
            [-c / h + hp * s / (h * h), -s / h - hp * c / (h * h)]
        }
    }
}

fn primal_bp(model: &PlaneModel, t: f64) -> f64 {
    match &model.family {
        PlaneFamily::Euclidean => 1.0,
        PlaneFamily::Lp { p } => {
            let e = 2.0 / p - 1.0;
            (2.0 / p) * (t.cos() * t.sin()).abs().powf(e)
        }
        PlaneFamily::Ellipse { a, b } => a * b,
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            let hpp = support_eval(*a0, terms, t, 2);
            h * (h + hpp)
        }
    }
}

fn primal_bq(model: &PlaneModel, t: f64) -> f64 {
    match &model.family {
        PlaneFamily::Euclidean => 1.0,
        PlaneFamily::Lp { p } => {
            let qc = p / (p - 1.0);
            let e = 2.0 / qc - 1.0;
            (2.0 / qc) * (t.cos() * t.sin()).abs().powf(e)
        }
        PlaneFamily::Ellipse { a, b } => 1.0 / (a * b),
        PlaneFamily::Fourier { a0, terms } => {
            let h = support_eval(*a0, terms, t, 0);
            1.0 / (h * h)
        }
    }
}

/// Residuals of the structural identities of a built field.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneReport {
    pub n: usize,
    pub tol: f64,
    pub excluded_nodes: usize,
    pub duality: CheckResult,
    pub symmetry: CheckResult,
    pub bracket_identity: CheckResult,
    pub reconstruction: CheckResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub max_residual: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(max_residual: f64, tol: f64) -> Self {
        Self { max_residual, pass: max_residual <= tol }
    }
}

impl PlaneReport {
    pub fn all_pass(&self) -> bool {
        self.duality.pass && self.symmetry.pass && self.bracket_identity.pass
            && self.reconstruction.pass
    }
}

/// Numerical verification of the duality relations on the grid:
/// `[p,q] = 1`, central symmetry, the bracket identity
/// `[p,p']·[q,q']² = [q',q'']` and the reconstruction `p = -q'/[q,q']`.
///
/// Derivative-based checks use an independent numerical derivative of the
/// sampled data (not the closed forms) and skip the masked singular windows.
pub fn validate_plane(field: &PlaneField, tol: f64) -> PlaneReport {
    let n = field.n();
    let half = field.grid.half_shift();
    let calc = field.calculus();

    let mut duality = 0.0f64;
    let mut symmetry = 0.0f64;
    for j in 0..n {
        if field.singular_nodes.contains(&j) {
            continue;
        }
        duality = duality.max((cross(field.p[j], field.q[j]) - 1.0).abs());
        let k = (j + half) % n;
        symmetry = symmetry
            .max((field.p[j][0] + field.p[k][0]).abs())
            .max((field.p[j][1] + field.p[k][1]).abs())
            .max((field.q[j][0] + field.q[k][0]).abs())
            .max((field.q[j][1] + field.q[k][1]).abs());
    }

    // one numerical differentiation of the sampled dual data
    let dq_x: Vec<f64> = field.dq.iter().map(|v| v[0]).collect();
    let dq_y: Vec<f64> = field.dq.iter().map(|v| v[1]).collect();
    let ddq_x = calc.derivative(&dq_x);
    let ddq_y = calc.derivative(&dq_y);
    let q_x: Vec<f64> = field.q.iter().map(|v| v[0]).collect();
    let q_y: Vec<f64> = field.q.iter().map(|v| v[1]).collect();
    let dq_num_x = calc.derivative(&q_x);
    let dq_num_y = calc.derivative(&q_y);

    let mut identity = 0.0f64;
    let mut reconstruction = 0.0f64;
    for j in 0..n {
        if calc.is_masked(j) {
            continue;
        }
        // [p,p'][q,q']² = [q',q'']; differentiating p = -q'/[q,q'] gives
        // [p,p'] = [q',q'']/[q,q']², so this is the duality chain closed.
        let dq_ddq = field.dq[j][0] * ddq_y[j] - field.dq[j][1] * ddq_x[j];
        identity = identity.max((field.bp[j] * field.bq[j] * field.bq[j] - dq_ddq).abs());
        reconstruction = reconstruction
            .max((field.p[j][0] + dq_num_x[j] / field.bq[j]).abs())
            .max((field.p[j][1] + dq_num_y[j] / field.bq[j]).abs());
    }

    PlaneReport {
        n,
        tol,
        excluded_nodes: calc.masked_count(),
        duality: CheckResult::new(duality, tol),
        symmetry: CheckResult::new(symmetry, tol),
        bracket_identity: CheckResult::new(identity, tol),
        reconstruction: CheckResult::new(reconstruction, tol),
    }
}
