//! Uniform staggered periodic grid together with the quadrature,
//! differentiation and cumulative-integration rules used throughout the
//! crate.
//!
//! Nodes sit at the half-step offsets `t_j = (j + 1/2) * 2π/n` so that no
//! node ever lands on an axis singularity of an L^p coefficient field.  On
//! smooth fields the rules are the classical ones for periodic data
//! (trapezoid-family quadrature, discrete Fourier differentiation).  On
//! fields with integrable coefficient singularities the quadrature and the
//! cumulative integral switch, inside a window around each singular point,
//! to product rules in the distance coordinate: the singular bracket factor
//! is folded into closed-form moments and only the smooth cofactor is
//! fitted, over the fractional-power basis its expansions actually live in.

use std::f64::consts::TAU;

/// Nodes per side of a singular point treated with the product rule; the
/// same window is excluded from pointwise checks.
pub const SINGULAR_WINDOW_CELLS: usize = 24;

/// Stencil width of the piecewise rules (nodes per cell rule).
const STENCIL: usize = 13;
/// Size of the generalized basis the window rules reproduce exactly.  Kept
/// equal to the stencil width (interpolatory rules); with surplus nodes the
/// fits become least-squares, which measured worse here.
const WINDOW_BASIS: usize = 13;

/// Uniform grid on `[0, 2π)` staggered by half a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    step: f64,
}

impl Grid {
    /// A grid needs a power-of-two size (for the FFT paths) of at least 64.
    pub fn new(n: usize) -> Option<Self> {
        if n < 64 || !n.is_power_of_two() {
            return None;
        }
        Some(Self { n, step: TAU / n as f64 })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Parameter value of node `j` (taken modulo `n`).
    pub fn node(&self, j: usize) -> f64 {
        ((j % self.n) as f64 + 0.5) * self.step
    }

    /// Half-step origin of the staggered grid, `t_0 = π/n`.
    pub fn origin(&self) -> f64 {
        0.5 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Index shift corresponding to a shift by π (half the period).
    pub fn half_shift(&self) -> usize {
        self.n / 2
    }

    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n as isize) as usize
    }
}

/// Location and local structure of an integrable coefficient singularity.
///
/// Near `t`, the primal bracket behaves like `dist^bp_exponent` and the dual
/// bracket like `dist^bq_exponent`.  The quadrature rules fold the powers
/// into their moments; the ODE transport instead substitutes
/// `dist = σ^root`, which makes both coefficient one-forms smooth in σ.
#[derive(Debug, Clone, Copy)]
pub struct SingularPoint {
    pub t: f64,
    pub bp_exponent: f64,
    pub bq_exponent: f64,
    pub root: f64,
}

/// Declares the singular factor an integrand carries, so the rule can fold
/// it into the measure and interpolate only the smooth cofactor.
///
/// Near an axis the primal bracket behaves like `dist^e_p` and the dual one
/// like `dist^e_q`; a polynomial in σ cannot follow either, but the moments
/// of `dist^e · dσ-measure` are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Integrand smooth across the singular points.
    Plain,
    /// Integrand of the form `[p,p'] · smooth`.
    BpWeighted,
    /// Integrand of the form `[q,q'] · smooth`.
    BqWeighted,
}

impl WeightKind {
    fn index(self) -> usize {
        match self {
            WeightKind::Plain => 0,
            WeightKind::BpWeighted => 1,
            WeightKind::BqWeighted => 2,
        }
    }
}

/// One cell of the composite rule: a 7-node stencil (offsets relative to the
/// cell index) plus weights for the full-cell integral and for the leading
/// half cell (cell boundary up to the node), one set per weight kind.
#[derive(Debug, Clone, Copy)]
struct CellRule {
    offsets: [isize; STENCIL],
    full: [[f64; STENCIL]; 3],
    half: [[f64; STENCIL]; 3],
}

/// Quadrature, cumulative integration, differentiation and the exclusion
/// mask for one grid / singularity configuration.
#[derive(Debug, Clone)]
pub struct Calculus {
    grid: Grid,
    cells: Vec<CellRule>,
    mask: Vec<bool>,
    smooth: bool,
}

impl Calculus {
    pub fn build(grid: Grid, singular: &[SingularPoint]) -> Self {
        let n = grid.len();
        let h = grid.step();
        let mut cells = vec![regular_cell_rule(h); n];
        let mut mask = vec![false; n];
        let smooth = singular.is_empty();
        let window = SINGULAR_WINDOW_CELLS.min(n / 8);

        for sp in singular {
            // Singular points of the supported families sit on cell
            // boundaries; snap to the nearest one.
            let boundary = (sp.t / h).round() as isize;
            for c in 0..window {
                // cells to the right of the singular boundary
                let idx = grid.wrap(boundary + c as isize);
                cells[idx] = sigma_cell_rule(h, sp, c, Side::Right);
                mask[idx] = true;
                // mirrored cells to the left
                let idx = grid.wrap(boundary - 1 - c as isize);
                cells[idx] = sigma_cell_rule(h, sp, c, Side::Left);
                mask[idx] = true;
            }
        }

        Self { grid, cells, mask, smooth }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Nodes excluded from pointwise checks (within the singular windows).
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_masked(&self, j: usize) -> bool {
        self.mask[j % self.mask.len()]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Integral of a sampled function over one full period.  `kind` names
    /// the singular factor the integrand carries (irrelevant on smooth
    /// fields).
    pub fn integrate(&self, f: &[f64], kind: WeightKind) -> f64 {
        assert_eq!(f.len(), self.grid.len());
        if self.smooth {
            // midpoint/trapezoid rule on the staggered periodic grid
            return f.iter().sum::<f64>() * self.grid.step();
        }
        let ki = kind.index();
        let mut acc = 0.0;
        for (c, rule) in self.cells.iter().enumerate() {
            for s in 0..STENCIL {
                acc += rule.full[ki][s] * f[self.grid.wrap(c as isize + rule.offsets[s])];
            }
        }
        acc
    }

    /// Cumulative integral `F(t_j) = ∫_0^{t_j} f dt` at every node.
    ///
    /// Accepts samples over several turns (`f.len()` a multiple of `n`); the
    /// cell rules tile periodically while the data does not.
    pub fn cumulative(&self, f: &[f64], kind: WeightKind) -> Vec<f64> {
        let n = self.grid.len();
        assert!(f.len() % n == 0 && !f.is_empty());
        let total = f.len();
        let ki = kind.index();
        let wrap = |j: isize| -> usize { j.rem_euclid(total as isize) as usize };
        let mut out = Vec::with_capacity(total);
        let mut boundary_acc = 0.0; // integral from 0 to the cell's left boundary
        for c in 0..total {
            let rule = &self.cells[c % n];
            let mut full = 0.0;
            let mut half = 0.0;
            for s in 0..STENCIL {
                let v = f[wrap(c as isize + rule.offsets[s])];
                full += rule.full[ki][s] * v;
                half += rule.half[ki][s] * v;
            }
            out.push(boundary_acc + half);
            boundary_acc += full;
        }
        out
    }

    /// Integral representation of `cumulative` evaluated at a cell boundary
    /// `t = k * step` (k may exceed one period for multi-turn data).
    pub fn cumulative_at_boundary(&self, f: &[f64], k: usize, kind: WeightKind) -> f64 {
        let n = self.grid.len();
        assert!(f.len() % n == 0);
        let total = f.len();
        let ki = kind.index();
        let wrap = |j: isize| -> usize { j.rem_euclid(total as isize) as usize };
        let mut acc = 0.0;
        for c in 0..k.min(total) {
            let rule = &self.cells[c % n];
            for s in 0..STENCIL {
                acc += rule.full[ki][s] * f[wrap(c as isize + rule.offsets[s])];
            }
        }
        acc
    }

    /// Periodic derivative of sampled data: discrete Fourier differentiation
    /// on smooth fields, 8th-order centered differences when singular
    /// windows are present (Fourier coefficients of the non-smooth samples
    /// decay too slowly there, while the FD error stays local).
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.grid.len());
        if self.smooth {
            spectral_derivative(f)
        } else {
            fd8_derivative(f, self.grid.step())
        }
    }

    /// Max-norm over the unmasked nodes.
    pub fn masked_max(&self, f: &[f64]) -> f64 {
        f.iter()
            .enumerate()
            .filter(|(j, _)| !self.mask[j % self.mask.len()])
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

#[derive(Clone, Copy)]
enum Side {
    Right,
    Left,
}

/// Weights for a regular (smooth-zone) cell: degree-6 interpolation through
/// the centered stencil, integrated exactly over the cell and the half cell.
/// All weight kinds coincide away from the singular windows.
fn regular_cell_rule(h: f64) -> CellRule {
    let mut offsets = [0isize; STENCIL];
    for (i, o) in offsets.iter_mut().enumerate() {
        *o = i as isize - (STENCIL / 2) as isize;
    }
    // node positions in a positive local frame, the cell being
    // [m·h, (m+1)·h] with m = STENCIL/2
    let xs: Vec<f64> = (0..STENCIL).map(|i| (i as f64 + 0.5) * h).collect();
    let exponents: Vec<f64> = (0..STENCIL).map(|i| i as f64).collect();
    let m = (STENCIL / 2) as f64;
    let full = product_weights(&xs, &exponents, m * h, (m + 1.0) * h, 0.0);
    let half = product_weights(&xs, &exponents, m * h, (m + 0.5) * h, 0.0);
    let full: [f64; STENCIL] = full.try_into().unwrap();
    let half: [f64; STENCIL] = half.try_into().unwrap();
    CellRule { offsets, full: [full, full, full], half: [half, half, half] }
}

/// Weights for cell `c` (0-based, counted away from the singular boundary)
/// inside a singular window, built in the distance coordinate `d`.
///
/// The integrands that cross these windows are spanned by fractional powers
/// of d: transported solutions gain increments from the set {2/p, 2-2/p}
/// and closed-form coefficient factors are analytic in d, so the rule
/// interpolates in the monoid those generators span instead of plain
/// polynomials.  `Side::Left` mirrors the orientation bookkeeping.  Three
/// weight sets are produced, one per singular factor `d^0`, `d^e_p`,
/// `d^e_q` folded into the measure.
fn sigma_cell_rule(h: f64, sp: &SingularPoint, c: usize, side: Side) -> CellRule {
    // stencil: nodes on this side of the singular point, one-sided near it
    let start = c.saturating_sub(STENCIL / 2); // first stencil cell index
    let d_nodes: Vec<f64> = (0..STENCIL).map(|s| ((start + s) as f64 + 0.5) * h).collect();
    let exponents = window_exponents(sp, WINDOW_BASIS);
    let d_lo = c as f64 * h;
    let d_hi = (c + 1) as f64 * h;
    let d_node = (c as f64 + 0.5) * h;
    // Leading half cell in t-orientation: on the right side of the point the
    // cell's left boundary is the one closer to the singularity, so the half
    // integral runs [d_lo, d_node]; on the left side it runs [d_node, d_hi].
    let (half_lo, half_hi) = match side {
        Side::Right => (d_lo, d_node),
        Side::Left => (d_node, d_hi),
    };

    let mut full = [[0.0; STENCIL]; 3];
    let mut half = [[0.0; STENCIL]; 3];
    for (slot, alpha) in [(0usize, 0.0), (1, sp.bp_exponent), (2, sp.bq_exponent)] {
        // integrate cofactor-interpolant · d^alpha; the d^alpha part of the
        // sampled integrand is divided out of the stencil values by folding
        // d_i^-alpha into the weights
        let mut w_full = product_weights(&d_nodes, &exponents, d_lo, d_hi, alpha);
        let mut w_half = product_weights(&d_nodes, &exponents, half_lo, half_hi, alpha);
        for (i, d) in d_nodes.iter().enumerate() {
            let fold = d.powf(-alpha);
            w_full[i] *= fold;
            w_half[i] *= fold;
        }
        full[slot] = w_full.try_into().unwrap();
        half[slot] = w_half.try_into().unwrap();
    }

    let offsets: [isize; STENCIL] = match side {
        Side::Right => {
            // cell index c sits at (boundary + c); stencil cell (start + s)
            let mut o = [0isize; STENCIL];
            for (s, v) in o.iter_mut().enumerate() {
                *v = (start + s) as isize - c as isize;
            }
            o
        }
        Side::Left => {
            let mut o = [0isize; STENCIL];
            for (s, v) in o.iter_mut().enumerate() {
                // mirrored: cell index (boundary - 1 - c), stencil cell
                // (boundary - 1 - (start + s))
                *v = c as isize - (start + s) as isize;
            }
            o
        }
    };
    CellRule { offsets, full, half }
}

/// Smallest `STENCIL` elements of the additive monoid spanned by the
/// increments that transported solutions and analytic coefficient factors
/// can carry across the singular point.
fn window_exponents(sp: &SingularPoint, count: usize) -> Vec<f64> {
    let gens = [1.0 + sp.bp_exponent, 1.0 + sp.bq_exponent, 1.0];
    let mut set: Vec<f64> = vec![0.0];
    // breadth-first closure, truncated well beyond the basis size
    let mut frontier = vec![0.0f64];
    while set.len() < 4 * count && !frontier.is_empty() {
        let mut next = Vec::new();
        for &e in &frontier {
            for &g in &gens {
                let cand = e + g;
                if cand > 40.0 {
                    continue;
                }
                if !set.iter().any(|x| (x - cand).abs() < 1e-9) {
                    set.push(cand);
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    set.sort_by(|a, b| a.total_cmp(b));
    set.truncate(count);
    set
}

/// Weights `w_i` with `Σ w_i g(x_i) = ∫_a^b P(d) d^alpha dd` where `P` is
/// the least-squares fit of the cofactor `g` over the span of
/// `d^exponents` (minimum-norm rule, exact on the basis).  The moments of
/// the basis against the measure are available in closed form, so no
/// auxiliary quadrature enters.
fn product_weights(d_nodes: &[f64], exponents: &[f64], a: f64, b: f64, alpha: f64) -> Vec<f64> {
    let rows = d_nodes.len();
    let cols = exponents.len();
    let scale = d_nodes.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-300);

    // moments of (d/scale)^e against d^alpha dd on [a, b]
    let moments: Vec<f64> = exponents
        .iter()
        .map(|e| {
            let power = e + alpha + 1.0;
            (b.powf(power) - a.powf(power)) / power / scale.powf(*e)
        })
        .collect();

    // basis matrix V[i][j] = (d_i/scale)^(e_j)
    let v: Vec<Vec<f64>> = d_nodes
        .iter()
        .map(|d| {
            let z = d / scale;
            exponents.iter().map(|e| z.powf(*e)).collect()
        })
        .collect();
    if rows == cols {
        let mut mat = vec![vec![0.0; rows]; rows];
        for i in 0..rows {
            for j in 0..cols {
                mat[j][i] = v[i][j];
            }
        }
        let mut w = moments;
        solve_dense(&mut mat, &mut w);
        return w;
    }

    // minimum-norm w with V^T w = moments, via thin QR of V (modified
    // Gram-Schmidt): w = Q R^-T moments
    let mut q: Vec<Vec<f64>> = v.clone();
    let mut r = vec![vec![0.0; cols]; cols];
    for j in 0..cols {
        for i in 0..j {
            let dot: f64 = (0..rows).map(|m| q[m][i] * q[m][j]).sum();
            r[i][j] = dot;
            for m in 0..rows {
                q[m][j] -= dot * q[m][i];
            }
        }
        // re-orthogonalization pass for the tail columns
        for i in 0..j {
            let dot: f64 = (0..rows).map(|m| q[m][i] * q[m][j]).sum();
            r[i][j] += dot;
            for m in 0..rows {
                q[m][j] -= dot * q[m][i];
            }
        }
        let norm: f64 = (0..rows).map(|m| q[m][j] * q[m][j]).sum::<f64>().sqrt();
        r[j][j] = norm;
        for m in 0..rows {
            q[m][j] /= norm;
        }
    }
    // solve R^T y = moments (forward substitution)
    let mut y = vec![0.0; cols];
    for i in 0..cols {
        let mut acc = moments[i];
        for k in 0..i {
            acc -= r[k][i] * y[k];
        }
        y[i] = acc / r[i][i];
    }
    (0..rows).map(|m| (0..cols).map(|j| q[m][j] * y[j]).sum()).collect()
}

/// Gaussian elimination with partial pivoting on a small dense system,
/// polished by one step of iterative refinement (the generalized
/// Vandermonde systems behind the window rules are moderately
/// ill-conditioned).
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    let a0: Vec<Vec<f64>> = a.to_vec();
    let b0: Vec<f64> = b.to_vec();
    lu_solve_in_place(a, b);
    // refinement: r = b0 - A0 x, x += A0 \ r
    let mut residual: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = b0[i];
            for j in 0..n {
                acc -= a0[i][j] * b[j];
            }
            acc
        })
        .collect();
    let mut lu = a0;
    lu_solve_in_place(&mut lu, &mut residual);
    for i in 0..n {
        b[i] += residual[i];
    }
}

fn lu_solve_in_place(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / d;
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
}

/// In-place radix-2 complex FFT (forward: e^{-ikt} convention).
fn fft(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        for start in (0..n).step_by(len) {
            for off in 0..len / 2 {
                let (wi, wr) = (ang * off as f64).sin_cos();
                let a = start + off;
                let b = a + len / 2;
                let tr = re[b] * wr - im[b] * wi;
                let ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
    if inverse {
        let inv = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= inv;
        }
        for v in im.iter_mut() {
            *v *= inv;
        }
    }
}

/// Derivative of 2π-periodic samples by Fourier multiplier ik.
///
/// The half-step grid offset is a modulation that commutes with the
/// multiplier, so the usual formula applies unchanged.
pub fn spectral_derivative(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert!(n.is_power_of_two());
    let mut re = f.to_vec();
    let mut im = vec![0.0; n];
    fft(&mut re, &mut im, false);
    for m in 0..n {
        let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if m == n / 2 {
            // Nyquist mode has no consistent odd-derivative image
            re[m] = 0.0;
            im[m] = 0.0;
            continue;
        }
        let (r, i) = (re[m], im[m]);
        re[m] = -k * i;
        im[m] = k * r;
    }
    fft(&mut re, &mut im, true);
    re
}

/// 8th-order centered finite-difference derivative with periodic wrap.
pub fn fd8_derivative(f: &[f64], step: f64) -> Vec<f64> {
    let n = f.len() as isize;
    let idx = |j: isize| -> f64 { f[j.rem_euclid(n) as usize] };
    let c = [3.0 / 840.0, -32.0 / 840.0, 168.0 / 840.0, -672.0 / 840.0];
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (k, &w) in c.iter().enumerate() {
                let o = (4 - k) as isize;
                acc += w * (idx(j - o) - idx(j + o));
            }
            acc / step
        })
        .collect()
}

/// Locations of sign changes of periodic samples, clustered so that a
/// discretized simple zero is reported once.
///
/// Values below `1e-10 * max|f|` are treated as zero and skipped; changes
/// within three grid steps of the previous one merge into a single zero.
pub fn sign_change_params(grid: Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let turns = n / grid.len();
    let step = grid.step();
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let floor = 1e-10 * scale;
    // walk significant samples only
    let sig: Vec<(usize, f64)> = f
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| v.abs() > floor)
        .collect();
    if sig.len() < 2 {
        return Vec::new();
    }
    let mut zeros: Vec<f64> = Vec::new();
    let total_t = turns as f64 * TAU;
    for w in 0..sig.len() {
        let (j0, v0) = sig[w];
        let (j1, v1) = sig[(w + 1) % sig.len()];
        if v0.signum() == v1.signum() {
            continue;
        }
        let t0 = (j0 as f64 + 0.5) * step;
        let mut t1 = (j1 as f64 + 0.5) * step;
        if w + 1 == sig.len() {
            t1 += total_t; // wrapped pair
        }
        let t = (t0 + (t1 - t0) * v0.abs() / (v0.abs() + v1.abs())).rem_euclid(total_t);
        zeros.push(t);
    }
    // cluster detections within 3 grid steps (incl. across the seam)
    let mut out: Vec<f64> = Vec::new();
    for &t in &zeros {
        let near_prev = out.last().map(|pt| (t - pt).abs() < 3.5 * step).unwrap_or(false);
        if !near_prev {
            out.push(t);
        }
    }
    if out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if total_t - last + first < 3.5 * step {
            out.pop();
        }
    }
    out
}

/// Midpoint-rule value of `∫_0^{2π} f dt` ignoring singular corrections;
/// adequate for smooth integrands regardless of the field.
pub fn plain_integral(grid: Grid, f: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), grid.len());
    f.iter().sum::<f64>() * grid.step()
}

/// Distance between two parameters on the 2π circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
