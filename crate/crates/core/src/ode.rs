//! Embedded Dormand-Prince 5(4) integrator with PI step-size control.
//!
//! The stepper is dimension-generic over fixed-size state vectors and
//! direction-agnostic (the span may run backwards, which the singular-layer
//! charts in `sturm` use).  Output points are hit exactly by clipping the
//! step, so no dense-output interpolant is involved.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:.9} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted after {0} steps")]
    MaxSteps(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-13, h_max: 0.1, max_steps: 4_000_000 }
    }
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self { rel_tol: tol, abs_tol: tol * 0.1, ..Self::default() }
    }
}

// Dormand-Prince coefficients (the classical DOPRI5 tableau).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `span.0` to `span.1`.
///
/// `outputs` must be sorted in the direction of integration and lie inside
/// the span; `on_output(index, t, y)` fires once for each as the solver
/// lands on it exactly.  `on_step` observes every accepted step.
pub fn rk45<const D: usize>(
    f: &mut impl FnMut(f64, &[f64; D]) -> [f64; D],
    span: (f64, f64),
    y0: [f64; D],
    ctl: &StepControl,
    outputs: &[f64],
    on_output: &mut impl FnMut(usize, f64, &[f64; D]),
    on_step: &mut impl FnMut(f64, &[f64; D]),
) -> Result<[f64; D], OdeError> {
    let (t0, t1) = span;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span_len = (t1 - t0).abs();
    let tiny = f64::EPSILON * 32.0 * t0.abs().max(t1.abs()).max(1.0);

    let mut t = t0;
    let mut y = y0;
    let mut next_out = 0usize;
    let mut flush = |t: f64, y: &[f64; D], next_out: &mut usize| {
        while *next_out < outputs.len() && (outputs[*next_out] - t) * dir <= tiny {
            on_output(*next_out, t, y);
            *next_out += 1;
        }
    };
    flush(t, &y, &mut next_out);
    if span_len <= tiny {
        flush(t1, &y, &mut next_out);
        return Ok(y);
    }

    let mut k = [[0.0; D]; 7];
    k[0] = f(t, &y);
    // controller step (magnitude); actual steps may be clipped shorter
    let mut h_ctrl = (span_len * 1e-3).min(ctl.h_max).max(1e-8_f64.min(span_len));
    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;

    loop {
        if steps >= ctl.max_steps {
            return Err(OdeError::MaxSteps(steps));
        }
        steps += 1;

        let mut h = dir * h_ctrl;
        let mut clipped = false;
        if (t + h - t1) * dir >= 0.0 {
            h = t1 - t;
            clipped = true;
        }
        if next_out < outputs.len() && (t + h - outputs[next_out]) * dir >= 0.0 {
            h = outputs[next_out] - t;
            clipped = true;
        }
        if h.abs() <= tiny {
            return Err(OdeError::StepUnderflow { t, h });
        }

        // stages (first-same-as-last: k[0] is f at the current point)
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for d in 0..D {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }

        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..D {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for s in 0..7 {
                acc5 += B5[s] * k[s][d];
                acc4 += B4[s] * k[s][d];
            }
            y5[d] += h * acc5;
            let scale = ctl.abs_tol + ctl.rel_tol * y[d].abs().max(y5[d].abs());
            let e = h * (acc5 - acc4) / scale;
            err += e * e;
        }
        err = (err / D as f64).sqrt();

        if err <= 1.0 || h.abs() <= tiny * 4.0 {
            t += h;
            y = y5;
            k[0] = k[6];
            on_step(t, &y);
            flush(t, &y, &mut next_out);
            if (t1 - t) * dir <= tiny {
                flush(t1, &y, &mut next_out);
                return Ok(y);
            }
            let e = err.max(1e-10);
            if !clipped {
                let fac = (0.9 * e.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 8.0);
                h_ctrl = (h_ctrl * fac).min(ctl.h_max);
            }
            err_prev = e;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h_ctrl = h.abs() * fac;
            if h_ctrl <= tiny {
                return Err(OdeError::StepUnderflow { t, h: dir * h_ctrl });
            }
        }
    }
}

/// Convenience wrapper without output points.
pub fn rk45_endpoint<const D: usize>(
    f: &mut impl FnMut(f64, &[f64; D]) -> [f64; D],
    span: (f64, f64),
    y0: [f64; D],
    ctl: &StepControl,
) -> Result<[f64; D], OdeError> {
    rk45(f, span, y0, ctl, &[], &mut |_, _, _| {}, &mut |_, _| {})
}
