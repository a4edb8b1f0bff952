//! Curve reconstruction from support functions and curvature radii,
//! evolutes, the double-evolute operator and its inverse, cusp/vertex
//! detection, orientation and width.
//!
//! A curve against the primal field is γ = h·p + w·q with w = h'/[q,q'] and
//! tangent γ' = r·p'.  Its evolute lives against the dual reference, where
//! the support is taken against p; one more evolute returns to the primal
//! reference.  Chaining the two support transformations gives the operator
//! `T h = -(1/[p,p']) (h'/[q,q'])'` whose eigenvectors are the cycloid
//! support functions.

use crate::grid::{sign_change_params, WeightKind};
use crate::plane::{cross, PlaneField, Role};
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("support derivative h'/[q,q'] is not finite at unmasked node {node}")]
    SingularSupport { node: usize },
    #[error("dual length {value:.3e} is not zero; the involute needs ∫ h [p,p'] dt = 0")]
    NotZeroDualLength { value: f64 },
}

/// A sampled curve together with the support data it was built from.
#[derive(Debug, Clone, Serialize)]
pub struct CurveData {
    /// Which reference (primal or dual) the support data is measured in.
    pub role: Role,
    /// Support samples.
    pub h: Vec<f64>,
    /// Normalized derivative samples (h' divided by the role's bracket).
    pub w: Vec<f64>,
    /// Curvature-radius samples; zeros are cusps, zeros of r' vertices.
    pub r: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Parameter values of the detected cusps.
    pub cusps: Vec<f64>,
    /// Parameter values of the detected vertices.
    pub vertices: Vec<f64>,
    /// Closure period in turns.
    pub turns: usize,
    /// Endpoint displacement after each completed turn (radius-integrated
    /// curves only; support-built curves close by construction).
    pub turn_displacements: Vec<[f64; 2]>,
}

impl CurveData {
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::MAX; 2];
        let mut hi = [f64::MIN; 2];
        for pt in &self.points {
            for i in 0..2 {
                lo[i] = lo[i].min(pt[i]);
                hi[i] = hi[i].max(pt[i]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// Endpoint miss after all turns, relative to the diameter.
    pub fn closure_miss_relative(&self, _field: &PlaneField) -> f64 {
        match self.turn_displacements.last() {
            Some(d) => (d[0] * d[0] + d[1] * d[1]).sqrt() / self.diameter().max(1e-300),
            None => 0.0,
        }
    }

    /// Endpoint miss after `turn` completed turns, relative to diameter.
    pub fn partial_miss_relative(&self, turn: usize) -> f64 {
        let d = self.turn_displacements[turn - 1];
        (d[0] * d[0] + d[1] * d[1]).sqrt() / self.diameter().max(1e-300)
    }

    /// Marks the grid node nearest to each listed parameter.
    pub fn flag_nodes(&self, params: &[f64], step: f64) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        let total = self.points.len();
        for &t in params {
            let j = ((t / step - 0.5).round() as isize).rem_euclid(total as isize) as usize;
            flags[j] = true;
        }
        flags
    }
}

/// Builds the curve of a support function by numerical differentiation of
/// the samples.  For eigenfunction data prefer [`curve_from_support_exact`],
/// which keeps the transport-accurate derivative.
pub fn curve_from_support(field: &PlaneField, h: &[f64]) -> Result<CurveData, GeometryError> {
    assert_eq!(h.len(), field.n());
    let dh = field.calculus().derivative(h);
    let w: Vec<f64> = dh.iter().zip(field.bq()).map(|(d, b)| d / b).collect();
    for (j, v) in w.iter().enumerate() {
        if !v.is_finite() && !field.calculus().is_masked(j) {
            return Err(GeometryError::SingularSupport { node: j });
        }
    }
    let t_op = double_evolute_from_w(field, &w);
    let r: Vec<f64> = h.iter().zip(&t_op).map(|(a, b)| a - b).collect();
    Ok(assemble_support_curve(field, h.to_vec(), w, r))
}

/// Builds the curve of an eigenfunction from its transported data: w comes
/// from the integration and r = (1-λ)h from the eigenvalue relation, so no
/// grid differentiation enters.
pub fn curve_from_support_exact(
    field: &PlaneField,
    h: &[f64],
    w: &[f64],
    lambda: f64,
) -> CurveData {
    let r: Vec<f64> = h.iter().map(|v| (1.0 - lambda) * v).collect();
    assemble_support_curve(field, h.to_vec(), w.to_vec(), r)
}

fn assemble_support_curve(
    field: &PlaneField,
    h: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
) -> CurveData {
    let n = field.n();
    let turns = h.len() / n;
    let points: Vec<[f64; 2]> = (0..h.len())
        .map(|j| {
            let p = field.p()[j % n];
            let q = field.q()[j % n];
            [h[j] * p[0] + w[j] * q[0], h[j] * p[1] + w[j] * q[1]]
        })
        .collect();
    let cusps = sign_change_params(field.grid(), &r);
    // vertices: sign changes of r' = (bq > 0) · d(r)/dt-normalized data;
    // for r = c·h the scan runs on w-type data supplied by the caller via
    // `vertices_of`, here we differentiate
    let dr = if h.len() == n {
        field.calculus().derivative(&r)
    } else {
        vec![0.0; h.len()]
    };
    let vertices = if h.len() == n {
        sign_change_params(field.grid(), &dr)
    } else {
        Vec::new()
    };
    CurveData {
        role: field.role(),
        h,
        w,
        r,
        points,
        cusps,
        vertices,
        turns,
        turn_displacements: Vec::new(),
    }
}

/// Integrates γ' = r·p' from `gamma0` with the grid's cumulative rule
/// (product-corrected near singular axes).  `r` may span several turns.
pub fn curve_from_radius(
    field: &PlaneField,
    r: &[f64],
    gamma0: [f64; 2],
    turns: usize,
) -> CurveData {
    curve_from_radius_at(field, r, gamma0, 0.0, turns)
}

/// Same, with the start point `t0` snapped to the nearest grid cell
/// boundary (the natural anchors of the cumulative rule).
pub fn curve_from_radius_at(
    field: &PlaneField,
    r: &[f64],
    gamma0: [f64; 2],
    t0: f64,
    turns: usize,
) -> CurveData {
    let n = field.n();
    assert_eq!(r.len(), n * turns);
    let step = field.grid().step();
    let boundary = (t0 / step).round() as usize;
    debug_assert!(
        (t0 - boundary as f64 * step).abs() < 0.5 * step,
        "start point snaps to a cell boundary"
    );

    // γ' = r p' = r [p,p'] q componentwise
    let calc = field.calculus();
    let integrand = |i: usize| -> Vec<f64> {
        (0..r.len())
            .map(|j| r[j] * field.bp()[j % n] * field.q()[j % n][i])
            .collect()
    };
    let fx = integrand(0);
    let fy = integrand(1);
    let cx = calc.cumulative(&fx, WeightKind::BpWeighted);
    let cy = calc.cumulative(&fy, WeightKind::BpWeighted);
    let x0 = calc.cumulative_at_boundary(&fx, boundary, WeightKind::BpWeighted);
    let y0 = calc.cumulative_at_boundary(&fy, boundary, WeightKind::BpWeighted);

    let points: Vec<[f64; 2]> = (0..r.len())
        .map(|j| [gamma0[0] + cx[j] - x0, gamma0[1] + cy[j] - y0])
        .collect();

    let mut turn_displacements = Vec::with_capacity(turns);
    for m in 1..=turns {
        let dx = calc.cumulative_at_boundary(&fx, m * n, WeightKind::BpWeighted);
        let dy = calc.cumulative_at_boundary(&fy, m * n, WeightKind::BpWeighted);
        turn_displacements.push([dx, dy]);
    }

    let cusps = sign_change_params(field.grid(), r);
    let h: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(j, pt)| cross(*pt, field.q()[j % n]))
        .collect();
    let w: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(j, pt)| -cross(*pt, field.p()[j % n]))
        .collect();
    let vertices = if turns == 1 {
        sign_change_params(field.grid(), &field.calculus().derivative(r))
    } else {
        Vec::new()
    };
    CurveData {
        role: field.role(),
        h,
        w,
        r: r.to_vec(),
        points,
        cusps,
        vertices,
        turns,
        turn_displacements,
    }
}

/// Evolute of a curve.  The result is measured against the other reference
/// (primal ↔ dual); both transformations are applied with the primal
/// field's arrays, dispatching on the curve's role tag.
pub fn evolute(field: &PlaneField, curve: &CurveData) -> CurveData {
    assert_eq!(field.role(), Role::Primal, "pass the primal field; roles are tracked on curves");
    let n = field.n();
    assert_eq!(curve.h.len(), n, "evolutes of single-turn curves only");
    let calc = field.calculus();
    let dw = calc.derivative(&curve.w);
    let dr = calc.derivative(&curve.r);

    match curve.role {
        Role::Primal => {
            // δ = γ - r p, support against p
            let points: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let p = field.p()[j];
                    [
                        curve.points[j][0] - curve.r[j] * p[0],
                        curve.points[j][1] - curve.r[j] * p[1],
                    ]
                })
                .collect();
            let h: Vec<f64> = curve.w.iter().map(|v| -v).collect();
            let w: Vec<f64> = dw.iter().zip(field.bp()).map(|(d, b)| -d / b).collect();
            let r: Vec<f64> = dr.iter().zip(field.bq()).map(|(d, b)| d / b).collect();
            let cusps = sign_change_params(field.grid(), &r);
            let vertices = sign_change_params(field.grid(), &calc.derivative(&r));
            CurveData {
                role: Role::Dual,
                h,
                w,
                r,
                points,
                cusps,
                vertices,
                turns: 1,
                turn_displacements: Vec::new(),
            }
        }
        Role::Dual => {
            // η = γ - r q, support against q again
            let points: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let q = field.q()[j];
                    [
                        curve.points[j][0] - curve.r[j] * q[0],
                        curve.points[j][1] - curve.r[j] * q[1],
                    ]
                })
                .collect();
            let h = curve.w.clone();
            let w: Vec<f64> = dw.iter().zip(field.bq()).map(|(d, b)| d / b).collect();
            let r: Vec<f64> = dr.iter().zip(field.bp()).map(|(d, b)| -d / b).collect();
            let cusps = sign_change_params(field.grid(), &r);
            let vertices = sign_change_params(field.grid(), &calc.derivative(&r));
            CurveData {
                role: Role::Primal,
                h,
                w,
                r,
                points,
                cusps,
                vertices,
                turns: 1,
                turn_displacements: Vec::new(),
            }
        }
    }
}

/// The double-evolute support operator `T h = -(1/[p,p']) (h'/[q,q'])'`.
pub fn double_evolute_operator(field: &PlaneField, h: &[f64]) -> Vec<f64> {
    let dh = field.calculus().derivative(h);
    let w: Vec<f64> = dh.iter().zip(field.bq()).map(|(d, b)| d / b).collect();
    double_evolute_from_w(field, &w)
}

fn double_evolute_from_w(field: &PlaneField, w: &[f64]) -> Vec<f64> {
    let dw = field.calculus().derivative(w);
    dw.iter().zip(field.bp()).map(|(d, b)| -d / b).collect()
}

const DUAL_LENGTH_TOL: f64 = 1e-8;

/// Inverse of the double-evolute operator on the zero-dual-length subspace:
/// two weighted cumulative integrations with the constants fixed so each
/// stage is again orthogonal to the constants, and T(Sh) = h.
pub fn involute_operator(field: &PlaneField, h: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = field.n();
    assert_eq!(h.len(), n);
    let calc = field.calculus();
    let weighted: Vec<f64> = h.iter().zip(field.bp()).map(|(a, b)| a * b).collect();
    let dual_length = calc.integrate(&weighted, WeightKind::BpWeighted);
    if dual_length.abs() > DUAL_LENGTH_TOL {
        return Err(GeometryError::NotZeroDualLength { value: dual_length });
    }

    let total_bq = calc.integrate(field.bq(), WeightKind::BqWeighted);
    let total_bp = calc.integrate(field.bp(), WeightKind::BpWeighted);

    let mut f = calc.cumulative(&weighted, WeightKind::BpWeighted);
    let f_bq: Vec<f64> = f.iter().zip(field.bq()).map(|(a, b)| a * b).collect();
    let c1 = -calc.integrate(&f_bq, WeightKind::BqWeighted) / total_bq;
    for v in f.iter_mut() {
        *v += c1;
    }

    let f_weighted: Vec<f64> = f.iter().zip(field.bq()).map(|(a, b)| a * b).collect();
    let g_raw = calc.cumulative(&f_weighted, WeightKind::BqWeighted);
    let g_bp: Vec<f64> = g_raw.iter().zip(field.bp()).map(|(a, b)| a * b).collect();
    let c2 = -calc.integrate(&g_bp, WeightKind::BpWeighted) / total_bp;
    Ok(g_raw.iter().map(|v| -(v + c2)).collect())
}

/// Width in the direction pair (t, t+π): w(t) = h(t) + h(t+π).
pub fn width_function(field: &PlaneField, h: &[f64]) -> Vec<f64> {
    let n = field.n();
    assert_eq!(h.len(), n);
    let half = n / 2;
    (0..n).map(|j| h[j] + h[(j + half) % n]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrientationReport {
    /// Sign expected from the homothety ratio: positive below 1, negative
    /// above.
    pub expected: i8,
    pub positive_nodes: usize,
    pub negative_nodes: usize,
    pub excluded_nodes: usize,
    pub min_abs: f64,
    pub identity_deviation: f64,
    pub pass: bool,
}

/// Sign pattern of [γ, γ'] away from cusps for an eigen-cycloid at λ;
/// checks the direct bracket against the identity [γ,γ'] = h²[p,p'](1-λ).
pub fn orientation_sign(field: &PlaneField, curve: &CurveData, lambda: f64) -> OrientationReport {
    let n = field.n();
    let step = field.grid().step();
    let expected = if lambda < 1.0 { 1i8 } else { -1i8 };
    let mut positive = 0usize;
    let mut negative = 0usize;
    let mut excluded = 0usize;
    let mut min_abs = f64::MAX;
    let mut identity_dev = 0.0f64;
    'nodes: for j in 0..n {
        if field.calculus().is_masked(j) {
            excluded += 1;
            continue;
        }
        let t = field.grid().node(j);
        for c in &curve.cusps {
            let d = (t - c).rem_euclid(TAU);
            if d.min(TAU - d) < 4.0 * step {
                excluded += 1;
                continue 'nodes;
            }
        }
        let direct = curve.r[j] * cross(curve.points[j], field.dp()[j]);
        let via_identity = curve.h[j] * curve.h[j] * field.bp()[j] * (1.0 - lambda);
        identity_dev = identity_dev.max((direct - via_identity).abs());
        if direct > 0.0 {
            positive += 1;
        } else if direct < 0.0 {
            negative += 1;
        }
        min_abs = min_abs.min(direct.abs());
    }
    let pass = if expected > 0 { negative == 0 } else { positive == 0 };
    OrientationReport {
        expected,
        positive_nodes: positive,
        negative_nodes: negative,
        excluded_nodes: excluded,
        min_abs,
        identity_deviation: identity_dev,
        pass,
    }
}

/// Least-squares scalar fit of `a ≈ s·b` followed by the max-norm residual,
/// used for homothety checks.
pub fn scalar_fit_residual(a: &[f64], b: &[f64]) -> (f64, f64) {
    let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    let s = num / den.max(1e-300);
    let res = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - s * y).abs())
        .fold(0.0f64, f64::max);
    (s, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::{build_plane, PlaneModel};
    use crate::spectrum::find_ladder;
    use std::f64::consts::PI;

    fn euclid(n: usize) -> PlaneField {
        build_plane(&PlaneModel::euclidean(), n).unwrap()
    }

    #[test]
    fn unit_support_gives_unit_circle() {
        let field = euclid(512);
        let h = vec![1.0; 512];
        let c = curve_from_support(&field, &h).unwrap();
        for (j, pt) in c.points.iter().enumerate() {
            let t = field.grid().node(j);
            assert!((pt[0] - t.cos()).abs() < 1e-10);
            assert!((pt[1] - t.sin()).abs() < 1e-10);
            assert!((c.r[j] - 1.0).abs() < 1e-9);
        }
        assert!(c.cusps.is_empty());
    }

    #[test]
    fn astroid_like_curve_has_four_cusps() {
        // k=2 eigenfunction of the circle: h = cos 2t, λ = 4; the curve is
        // the classical 4-cusp hypocycloid family member
        let field = euclid(1024);
        let h: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let c = curve_from_support(&field, &h).unwrap();
        assert_eq!(c.cusps.len(), 4, "{:?}", c.cusps);
        // closed-form check: against R1(cos 3t, -sin 3t) + 3R1(cos t, sin t)
        // with the scale fixed by r = -3 cos 2t → point set distance small
        let r1: f64 = 0.5;
        // the closed form carries its cusps on the axes; ours sit on the
        // diagonals (r = -3cos 2θ vanishes at odd multiples of π/4), so the
        // overlay includes the eighth-turn rotation
        let (rc, rs) = (std::f64::consts::FRAC_PI_4.cos(), std::f64::consts::FRAC_PI_4.sin());
        let dense: Vec<[f64; 2]> = (0..4096)
            .map(|i| {
                let t = i as f64 / 4096.0 * TAU;
                let x = r1 * (3.0 * t).cos() + 3.0 * r1 * t.cos();
                let y = -r1 * (3.0 * t).sin() + 3.0 * r1 * t.sin();
                [rc * x + rs * y, -rs * x + rc * y]
            })
            .collect();
        let mut worst = 0.0f64;
        for pt in c.points.iter().step_by(17) {
            let d = dense
                .iter()
                .map(|o| ((o[0] - pt[0]).powi(2) + (o[1] - pt[1]).powi(2)).sqrt())
                .fold(f64::MAX, f64::min);
            worst = worst.max(d);
        }
        assert!(worst < 2e-3, "point-set distance {worst}");
    }

    #[test]
    fn constant_shift_translates_by_scaled_ball() {
        let field = euclid(512);
        let h: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let shift = 0.05; // small enough to keep the sign pattern of r
        let h2: Vec<f64> = h.iter().map(|v| v + shift).collect();
        let c1 = curve_from_support(&field, &h).unwrap();
        let c2 = curve_from_support(&field, &h2).unwrap();
        for j in 0..field.n() {
            let p = field.p()[j];
            assert!((c2.points[j][0] - c1.points[j][0] - shift * p[0]).abs() < 1e-10);
            assert!((c2.points[j][1] - c1.points[j][1] - shift * p[1]).abs() < 1e-10);
        }
        assert_eq!(c1.cusps.len(), c2.cusps.len());
    }

    #[test]
    fn classical_cycloid_from_radius() {
        // r(t) = 4R sin t is a λ=1 solution: the curve is the classical
        // open cycloid train, advancing 4πR per turn with arches of
        // height 2R
        let field = euclid(2048);
        let r_amp = 0.7;
        let r: Vec<f64> = field.grid().nodes().map(|t| 4.0 * r_amp * t.sin()).collect();
        let c = curve_from_radius(&field, &r, [0.0, 0.0], 1);
        let d = c.turn_displacements[0];
        let advance = (d[0] * d[0] + d[1] * d[1]).sqrt();
        assert!(
            (advance - 4.0 * PI * r_amp).abs() < 1e-8,
            "advance per turn {advance} vs {}",
            4.0 * PI * r_amp
        );
        // arch height: max x - min x = 2R (the train advances along -y
        // here; the exact placement depends on the tangent convention)
        let xs: Vec<f64> = c.points.iter().map(|p| p[0]).collect();
        let span = xs.iter().fold(f64::MIN, |m, v| m.max(*v))
            - xs.iter().fold(f64::MAX, |m, v| m.min(*v));
        let ys: Vec<f64> = c.points.iter().map(|p| p[1]).collect();
        let span_y = ys.iter().fold(f64::MIN, |m, v| m.max(*v))
            - ys.iter().fold(f64::MAX, |m, v| m.min(*v));
        let arch = span.min(span_y);
        // grid sampling resolves the arch apex to O(step²)
        assert!((arch - 2.0 * r_amp).abs() < 1e-5, "arch height {arch}");
        // exact pointwise match with the closed form after aligning the
        // advance direction: r = 4R sin t gives x' = -4R sin²t         ,
        // y' = 4R sin t cos t, i.e. (x, y) = (-R(2t - sin 2t), R(1-cos 2t))
        for (j, t) in field.grid().nodes().enumerate() {
            let exact = [-r_amp * (2.0 * t - (2.0 * t).sin()), r_amp * (1.0 - (2.0 * t).cos())];
            assert!((c.points[j][0] - exact[0]).abs() < 1e-9, "node {j}");
            assert!((c.points[j][1] - exact[1]).abs() < 1e-9, "node {j}");
        }
    }

    #[test]
    fn rational_radius_closes_after_n_turns_with_2m_cusps() {
        // r = C sin((m/n)·t) with m/n = 3/2: closes after 2 turns, 6 cusps
        let field = euclid(1024);
        let turns = 2usize;
        let r: Vec<f64> = (0..turns * field.n())
            .map(|j| {
                let t = (j as f64 + 0.5) * field.grid().step();
                0.8 * (1.5 * t).sin()
            })
            .collect();
        let c = curve_from_radius(&field, &r, [0.0, 0.0], turns);
        assert!(c.closure_miss_relative(&field) < 1e-9);
        assert!(c.partial_miss_relative(1) > 1e-3, "open after one turn");
        assert_eq!(c.cusps.len(), 6);
    }

    #[test]
    fn evolute_of_circle_degenerates() {
        let field = euclid(512);
        let h = vec![1.0; 512];
        let c = curve_from_support(&field, &h).unwrap();
        let e = evolute(&field, &c);
        assert_eq!(e.role, Role::Dual);
        for j in 0..field.n() {
            assert!(e.points[j][0].abs() < 1e-9);
            assert!(e.points[j][1].abs() < 1e-9);
            assert!(e.r[j].abs() < 1e-9);
        }
    }

    #[test]
    fn double_evolute_is_homothety_on_eigenfunctions() {
        let field = euclid(512);
        let h: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let c = curve_from_support(&field, &h).unwrap();
        let e1 = evolute(&field, &c);
        let e2 = evolute(&field, &e1);
        assert_eq!(e2.role, Role::Primal);
        let (scale, res) = scalar_fit_residual(&e2.h, &c.h);
        assert!((scale - 4.0).abs() < 1e-8, "homothety ratio {scale}");
        assert!(res < 1e-7, "residual {res}");
        // points are scaled by the same ratio
        for j in (0..field.n()).step_by(31) {
            assert!((e2.points[j][0] - 4.0 * c.points[j][0]).abs() < 1e-7);
            assert!((e2.points[j][1] - 4.0 * c.points[j][1]).abs() < 1e-7);
        }
    }

    #[test]
    fn operator_matches_trig_eigenvalues() {
        let field = euclid(256);
        let h: Vec<f64> = field.grid().nodes().map(|t| (3.0 * t).cos()).collect();
        let th = double_evolute_operator(&field, &h);
        for j in 0..field.n() {
            assert!((th[j] - 9.0 * h[j]).abs() < 1e-8);
        }
        let ones = vec![1.0; 256];
        let t1 = double_evolute_operator(&field, &ones);
        for v in t1 {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn lp_eigenfunction_operator_residual() {
        let field = build_plane(&PlaneModel::lp(3.0), 2048).unwrap();
        let ladder = find_ladder(&field, 5, 1e-9).unwrap();
        let (rec, _) = ladder.pair(5);
        let th = double_evolute_operator(&field, &rec.h);
        let mut worst = 0.0f64;
        for j in 0..field.n() {
            if field.calculus().is_masked(j) {
                continue;
            }
            worst = worst.max((th[j] - rec.lambda * rec.h[j]).abs());
        }
        assert!(worst < 1e-6, "residual {worst} at λ={}", rec.lambda);
    }

    #[test]
    fn involute_inverts_operator() {
        let field = euclid(512);
        let h: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let s = involute_operator(&field, &h).unwrap();
        for j in 0..field.n() {
            assert!((s[j] - h[j] / 4.0).abs() < 1e-10, "node {j}");
        }
        // round trip T(S h) = h for mixed input
        let mixed: Vec<f64> = field
            .grid()
            .nodes()
            .map(|t| (2.0 * t).cos() + 0.4 * (5.0 * t).sin())
            .collect();
        let s = involute_operator(&field, &mixed).unwrap();
        let back = double_evolute_operator(&field, &s);
        for j in 0..field.n() {
            assert!((back[j] - mixed[j]).abs() < 1e-6, "node {j}");
        }
    }

    #[test]
    fn involute_requires_zero_dual_length() {
        let field = euclid(256);
        let h = vec![1.0; 256];
        assert!(matches!(
            involute_operator(&field, &h),
            Err(GeometryError::NotZeroDualLength { .. })
        ));
    }

    #[test]
    fn involute_eigen_relation_on_lp() {
        let field = build_plane(&PlaneModel::lp(3.0), 2048).unwrap();
        let ladder = find_ladder(&field, 5, 1e-9).unwrap();
        let (rec, _) = ladder.pair(5);
        let s = involute_operator(&field, &rec.h).unwrap();
        let mut worst = 0.0f64;
        for j in 0..field.n() {
            if field.calculus().is_masked(j) {
                continue;
            }
            worst = worst.max((s[j] - rec.h[j] / rec.lambda).abs());
        }
        assert!(worst < 1e-6, "S h = h/λ residual {worst}");
    }

    #[test]
    fn width_of_constant_and_odd_eigenfunctions() {
        let field = euclid(256);
        let ones = vec![1.0; 256];
        for v in width_function(&field, &ones) {
            assert_eq!(v, 2.0);
        }
        let h3: Vec<f64> = field.grid().nodes().map(|t| (3.0 * t).cos()).collect();
        for v in width_function(&field, &h3) {
            assert!(v.abs() < 1e-13, "antiperiodic widths cancel");
        }
        let shifted: Vec<f64> = h3.iter().map(|v| v + 0.8).collect();
        for v in width_function(&field, &shifted) {
            assert!((v - 1.6).abs() < 1e-13);
        }
        let h2: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let w2 = width_function(&field, &h2);
        for (j, v) in w2.iter().enumerate() {
            assert!((v - 2.0 * h2[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn lp_eigen_orientation_is_negative() {
        let field = build_plane(&PlaneModel::lp(3.0), 2048).unwrap();
        let ladder = find_ladder(&field, 5, 1e-9).unwrap();
        let (rec, _) = ladder.pair(5);
        let curve = curve_from_support_exact(&field, &rec.h, &rec.hw, rec.lambda);
        let rep = orientation_sign(&field, &curve, rec.lambda);
        assert_eq!(rep.expected, -1);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.positive_nodes == 0 && rep.negative_nodes > 1500);
    }

    #[test]
    fn orientation_signs() {
        let field = euclid(1024);
        // hypocycloid λ = 4
        let h: Vec<f64> = field.grid().nodes().map(|t| (2.0 * t).cos()).collect();
        let c = curve_from_support(&field, &h).unwrap();
        let rep = orientation_sign(&field, &c, 4.0);
        assert_eq!(rep.expected, -1);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.identity_deviation < 1e-8);
        // epicycloid λ = 4/9 needs the 3-turn eigenfunction; use the exact
        // relation r = (1-λ)h on a single-turn toy instead
        let c_epi = curve_from_support_exact(
            &field,
            &h,
            &field.calculus().derivative(&h),
            4.0 / 9.0,
        );
        let rep = orientation_sign(&field, &c_epi, 4.0 / 9.0);
        assert_eq!(rep.expected, 1);
        assert!(rep.pass);
    }
}
