//! Numerical backbone: adaptive and fixed-step Runge-Kutta integration for
//! arbitrary right-hand sides, plus composite quadrature for cumulative and
//! iterated integrals.

use thiserror::Error;

/// Right-hand side of a first-order system: `rhs(t, y, dy)` fills `dy`.
pub type Rhs<'a> = &'a dyn Fn(f64, &[f64], &mut [f64]);

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("integration span must satisfy t1 > t0")]
    BadSpan,
    #[error("tolerances must be positive")]
    BadTolerance,
    #[error("output grid must be increasing and contained in the span")]
    BadGrid,
    #[error("quadrature depth must be 1, 2 or 3, got {0}")]
    BadDepth(u8),
    #[error("integrand returned a non-finite value at t = {t}")]
    NonFiniteIntegrand { t: f64 },
}

/// Stepping scheme used by [`solve_ivp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Embedded Dormand-Prince 5(4) pair with adaptive steps.
    AdaptiveRk45,
    /// Classical fourth-order Runge-Kutta with the given fixed step.
    FixedRk4 { h: f64 },
}

/// An initial value problem `y' = rhs(t, y)`, `y(t0) = y0` on `[t0, t1]`,
/// sampled on `output` grid points.
pub struct IvpProblem<'a> {
    pub dim: usize,
    pub rhs: Rhs<'a>,
    pub span: (f64, f64),
    pub y0: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub output: Vec<f64>,
    pub method: Method,
    /// Cap on the adaptive step. The cubic-Hermite dense output is fourth
    /// order in the step, so callers that sample between steps keep this a
    /// modest fraction of the span.
    pub max_step: Option<f64>,
}

impl<'a> IvpProblem<'a> {
    pub fn new(
        rhs: Rhs<'a>,
        span: (f64, f64),
        y0: Vec<f64>,
        tol: f64,
        output: Vec<f64>,
    ) -> Self {
        IvpProblem {
            dim: y0.len(),
            rhs,
            span,
            y0,
            abs_tol: tol,
            rel_tol: tol,
            output,
            method: Method::AdaptiveRk45,
            max_step: None,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }
}

/// Step cap giving interpolation error well below the integration tolerances
/// used across the crate.
pub fn dense_step_cap(span: (f64, f64)) -> f64 {
    (span.1 - span.0) / 512.0
}

/// Evenly spaced grid of `n` points covering `[t0, t1]` inclusive.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Sampled solution of an [`IvpProblem`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    /// `states[i]` is the state at `times[i]`.
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
}

impl Solution {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty solution")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
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

/// Integrates the problem, producing dense output (cubic Hermite between
/// accepted steps) at the requested grid points.
pub fn solve_ivp(p: &IvpProblem) -> Result<Solution, OdeError> {
    let (t0, t1) = p.span;
    if t1 <= t0 || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::BadSpan);
    }
    if p.abs_tol <= 0.0 || p.rel_tol <= 0.0 {
        return Err(OdeError::BadTolerance);
    }
    let eps = 1e-9 * (t1 - t0);
    if p.output.windows(2).any(|w| w[1] <= w[0])
        || p.output.first().is_some_and(|&t| t < t0 - eps)
        || p.output.last().is_some_and(|&t| t > t1 + eps)
    {
        return Err(OdeError::BadGrid);
    }

    match p.method {
        Method::AdaptiveRk45 => adaptive_rk45(p),
        Method::FixedRk4 { h } => fixed_rk4(p, h),
    }
}

struct DenseSampler<'a> {
    grid: &'a [f64],
    next: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl<'a> DenseSampler<'a> {
    fn new(grid: &'a [f64]) -> Self {
        DenseSampler {
            grid,
            next: 0,
            times: Vec::with_capacity(grid.len()),
            states: Vec::with_capacity(grid.len()),
        }
    }

    /// Emits every grid point inside the accepted step `[ta, tb]` by cubic
    /// Hermite interpolation from the endpoint values and slopes.
    fn emit(&mut self, ta: f64, ya: &[f64], fa: &[f64], tb: f64, yb: &[f64], fb: &[f64]) {
        let h = tb - ta;
        while self.next < self.grid.len() && self.grid[self.next] <= tb + 1e-12 * h.abs() {
            let t = self.grid[self.next];
            let s = ((t - ta) / h).clamp(0.0, 1.0);
            let s2 = s * s;
            let s3 = s2 * s;
            let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
            let h10 = s3 - 2.0 * s2 + s;
            let h01 = -2.0 * s3 + 3.0 * s2;
            let h11 = s3 - s2;
            let y: Vec<f64> = (0..ya.len())
                .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
                .collect();
            self.times.push(t);
            self.states.push(y);
            self.next += 1;
        }
    }
}

fn eval_rhs(
    p: &IvpProblem,
    t: f64,
    y: &[f64],
    out: &mut [f64],
    stats: &mut StepStats,
) -> Result<(), OdeError> {
    (p.rhs)(t, y, out);
    stats.rhs_evals += 1;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFiniteRhs { t });
    }
    Ok(())
}

fn adaptive_rk45(p: &IvpProblem) -> Result<Solution, OdeError> {
    let (t0, t1) = p.span;
    let n = p.dim;
    let mut stats = StepStats::default();
    let mut sampler = DenseSampler::new(&p.output);

    let mut t = t0;
    let mut y = p.y0.clone();
    let mut k = vec![vec![0.0; n]; 7];
    eval_rhs(p, t, &y, &mut k[0], &mut stats)?;

    // grid point exactly at t0
    if sampler.next < p.output.len() && (p.output[0] - t0).abs() <= 1e-12 * (t1 - t0) {
        sampler.times.push(p.output[0]);
        sampler.states.push(y.clone());
        sampler.next = 1;
    }

    let h_cap = p.max_step.unwrap_or(f64::INFINITY);
    let mut h = ((t1 - t0) / 100.0).clamp(1e-8, 0.1).min(h_cap);
    let h_min = 1e-14 * (t1 - t0);
    let mut y_stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut y4 = vec![0.0; n];

    while t < t1 {
        if h < h_min {
            return Err(OdeError::StepUnderflow { t });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        for i in 1..7 {
            for (j, ys) in y_stage.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (l, kl) in k.iter().enumerate().take(i) {
                    acc += A[i][l] * kl[j];
                }
                *ys = y[j] + h * acc;
            }
            let ti = t + C[i] * h;
            eval_rhs(p, ti, &y_stage, &mut k[i], &mut stats)?;
        }

        for j in 0..n {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for (l, kl) in k.iter().enumerate() {
                acc5 += B5[l] * kl[j];
                acc4 += B4[l] * kl[j];
            }
            y5[j] = y[j] + h * acc5;
            y4[j] = y[j] + h * acc4;
        }

        let mut err: f64 = 0.0;
        for j in 0..n {
            let sc = p.abs_tol + p.rel_tol * y[j].abs().max(y5[j].abs());
            err += ((y5[j] - y4[j]) / sc).powi(2);
        }
        err = (err / n as f64).sqrt();

        if err <= 1.0 {
            // k[6] is f(t + h, y5): the FSAL stage
            let fb = k[6].clone();
            sampler.emit(t, &y, &k[0], t + h, &y5, &fb);
            t += h;
            y.copy_from_slice(&y5);
            k[0].copy_from_slice(&fb);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }

        let scale = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * scale).min(h_cap);
    }

    // any trailing grid points equal to t1 within roundoff
    while sampler.next < p.output.len() {
        sampler.times.push(p.output[sampler.next]);
        sampler.states.push(y.clone());
        sampler.next += 1;
    }

    Ok(Solution {
        times: sampler.times,
        states: sampler.states,
        stats,
    })
}

fn fixed_rk4(p: &IvpProblem, h: f64) -> Result<Solution, OdeError> {
    let (t0, t1) = p.span;
    if h <= 0.0 {
        return Err(OdeError::BadTolerance);
    }
    let n = p.dim;
    let mut stats = StepStats::default();
    let mut sampler = DenseSampler::new(&p.output);

    let mut t = t0;
    let mut y = p.y0.clone();
    let mut f_a = vec![0.0; n];
    eval_rhs(p, t, &y, &mut f_a, &mut stats)?;

    if sampler.next < p.output.len() && (p.output[0] - t0).abs() <= 1e-12 * (t1 - t0) {
        sampler.times.push(p.output[0]);
        sampler.states.push(y.clone());
        sampler.next = 1;
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut y_next = vec![0.0; n];

    while t < t1 - 1e-14 * (t1 - t0) {
        let step = h.min(t1 - t);
        k1.copy_from_slice(&f_a);
        for j in 0..n {
            y_stage[j] = y[j] + 0.5 * step * k1[j];
        }
        eval_rhs(p, t + 0.5 * step, &y_stage, &mut k2, &mut stats)?;
        for j in 0..n {
            y_stage[j] = y[j] + 0.5 * step * k2[j];
        }
        eval_rhs(p, t + 0.5 * step, &y_stage, &mut k3, &mut stats)?;
        for j in 0..n {
            y_stage[j] = y[j] + step * k3[j];
        }
        eval_rhs(p, t + step, &y_stage, &mut k4, &mut stats)?;
        for j in 0..n {
            y_next[j] = y[j] + step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let mut f_b = vec![0.0; n];
        eval_rhs(p, t + step, &y_next, &mut f_b, &mut stats)?;
        sampler.emit(t, &y, &f_a, t + step, &y_next, &f_b);
        t += step;
        y.copy_from_slice(&y_next);
        f_a = f_b;
        stats.accepted += 1;
    }

    while sampler.next < p.output.len() {
        sampler.times.push(p.output[sampler.next]);
        sampler.states.push(y.clone());
        sampler.next += 1;
    }

    Ok(Solution {
        times: sampler.times,
        states: sampler.states,
        stats,
    })
}

/// Default absolute tolerance of the quadrature routines.
pub const QUAD_TOL: f64 = 1e-12;

fn simpson(f0: f64, fm: f64, f1: f64, h: f64) -> f64 {
    h / 6.0 * (f0 + 4.0 * fm + f1)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, OdeError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() {
        return Err(OdeError::NonFiniteIntegrand { t: lm });
    }
    if !frm.is_finite() {
        return Err(OdeError::NonFiniteIntegrand { t: rm });
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Adaptive composite Simpson quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, OdeError> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    for (t, v) in [(a, fa), (m, fm), (b, fb)] {
        if !v.is_finite() {
            return Err(OdeError::NonFiniteIntegrand { t });
        }
    }
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_simpson_rec(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Sampled antiderivative `F(t_i) = ∫_{grid[0]}^{t_i} f`, with `F(grid[0]) = 0`,
/// each panel integrated by adaptive composite Simpson.
pub fn cumulative(f: &dyn Fn(f64) -> f64, grid: &[f64]) -> Result<Vec<f64>, OdeError> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OdeError::BadGrid);
    }
    let total = grid.last().copied().unwrap_or(0.0) - grid.first().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        let tol = QUAD_TOL * ((w[1] - w[0]) / total).max(1e-6);
        acc += adaptive_simpson(f, w[0], w[1], tol)?;
        out.push(acc);
    }
    Ok(out)
}

/// Nested integral specification: `depth` = 1 gives `∫_0^t f`, 2 gives
/// `∫_0^t ∫_0^s f`, 3 the triple nesting.
pub struct QuadratureSpec<'a> {
    pub integrand: &'a dyn Fn(f64) -> f64,
    pub depth: u8,
    pub upper: f64,
    /// Panels of the inner cumulative grids used for depth 2 and 3.
    pub inner_panels: usize,
}

impl<'a> QuadratureSpec<'a> {
    pub fn new(integrand: &'a dyn Fn(f64) -> f64, depth: u8, upper: f64) -> Self {
        QuadratureSpec {
            integrand,
            depth,
            upper,
            inner_panels: 8192,
        }
    }
}

/// Integral of the cubic Hermite interpolant through `(values, slopes)` on a
/// uniform grid with spacing `h`, accumulated panel by panel.
fn hermite_cumulative(values: &[f64], slopes: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..values.len() - 1 {
        acc += 0.5 * h * (values[i] + values[i + 1])
            + h * h / 12.0 * (slopes[i] - slopes[i + 1]);
        out.push(acc);
    }
    out
}

/// Evaluates an iterated integral by cascading one-dimensional rules over
/// inner cumulative antiderivatives.
pub fn iterated_integral(q: &QuadratureSpec) -> Result<f64, OdeError> {
    if !(1..=3).contains(&q.depth) {
        return Err(OdeError::BadDepth(q.depth));
    }
    if q.upper == 0.0 {
        return Ok(0.0);
    }
    if q.depth == 1 {
        return adaptive_simpson(q.integrand, 0.0, q.upper, QUAD_TOL);
    }

    let n = q.inner_panels;
    let h = q.upper / n as f64;
    let mut f_vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * h;
        let v = (q.integrand)(t);
        if !v.is_finite() {
            return Err(OdeError::NonFiniteIntegrand { t });
        }
        f_vals.push(v);
    }
    // F1 on the grid by per-panel Simpson (midpoint evaluations), then the
    // outer levels integrate the Hermite interpolant, whose slopes are known
    // exactly from the previous level.
    let mut f1 = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    f1.push(0.0);
    for i in 0..n {
        let mid = (q.integrand)((i as f64 + 0.5) * h);
        if !mid.is_finite() {
            return Err(OdeError::NonFiniteIntegrand {
                t: (i as f64 + 0.5) * h,
            });
        }
        acc += simpson(f_vals[i], mid, f_vals[i + 1], h);
        f1.push(acc);
    }
    if q.depth == 2 {
        let f2 = hermite_cumulative(&f1, &f_vals, h);
        return Ok(*f2.last().unwrap());
    }
    let f2 = hermite_cumulative(&f1, &f_vals, h);
    let f3 = hermite_cumulative(&f2, &f1, h);
    Ok(*f3.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_problem_stays_constant() {
        let rhs = |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0;
        let p = IvpProblem::new(&rhs, (0.0, 2.0), vec![3.0], 1e-10, uniform_grid(0.0, 2.0, 5));
        let sol = solve_ivp(&p).unwrap();
        for s in &sol.states {
            assert_eq!(s[0], 3.0);
        }
    }

    #[test]
    fn exponential_growth_hits_e() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let p = IvpProblem::new(&rhs, (0.0, 1.0), vec![1.0], 1e-12, vec![1.0]);
        let sol = solve_ivp(&p).unwrap();
        assert_relative_eq!(sol.last()[0], std::f64::consts::E, epsilon = 1e-9);
    }

    #[test]
    fn constant_force_phase_flow() {
        // q' = p/m, p' = -f0: closed form p = p0 - f0 t, q = q0 + p0 t/m - f0 t^2/(2m)
        let (m, f0, q0, p0, t1) = (1.5, 0.8, 0.3, -0.2, 2.0);
        let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1] / m;
            dy[1] = -f0;
        };
        let p = IvpProblem::new(&rhs, (0.0, t1), vec![q0, p0], 1e-12, vec![t1]);
        let sol = solve_ivp(&p).unwrap();
        assert_relative_eq!(sol.last()[1], p0 - f0 * t1, epsilon = 1e-10);
        assert_relative_eq!(
            sol.last()[0],
            q0 + p0 * t1 / m - f0 * t1 * t1 / (2.0 * m),
            epsilon = 1e-10
        );
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        // y' = -y + cos 2t from the particular solution (cos 2t + 2 sin 2t)/5
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0] + (2.0 * t).cos();
        let grid = uniform_grid(0.0, 3.0, 61);
        let p = IvpProblem::new(&rhs, (0.0, 3.0), vec![0.2], 1e-11, grid.clone())
            .with_max_step(dense_step_cap((0.0, 3.0)));
        let sol = solve_ivp(&p).unwrap();
        assert_eq!(sol.times.len(), 61);
        for (t, s) in sol.times.iter().zip(&sol.states) {
            let exact = ((2.0 * t).cos() + 2.0 * (2.0 * t).sin()) / 5.0;
            assert_relative_eq!(s[0], exact, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn step_cap_controls_interpolation_error_on_quadrature_problems() {
        // With a right-hand side independent of y the embedded error estimate
        // is blind, steps grow to the cap, and dense output rests on it.
        let rhs = |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = (2.0 * t).cos();
        let grid = uniform_grid(0.0, 3.0, 61);
        let p = IvpProblem::new(&rhs, (0.0, 3.0), vec![0.0], 1e-11, grid.clone())
            .with_max_step(dense_step_cap((0.0, 3.0)));
        let sol = solve_ivp(&p).unwrap();
        for (t, s) in sol.times.iter().zip(&sol.states) {
            assert_relative_eq!(s[0], (2.0 * t).sin() / 2.0, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn fixed_rk4_order_is_four() {
        // error on y' = -y at t = 1 scales as h^4; log-log slope 4.0 +/- 0.2
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let exact = (-1.0f64).exp();
        let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&h| {
                let p = IvpProblem {
                    method: Method::FixedRk4 { h },
                    ..IvpProblem::new(&rhs, (0.0, 1.0), vec![1.0], 1e-10, vec![1.0])
                };
                (solve_ivp(&p).unwrap().last()[0] - exact).abs()
            })
            .collect();
        let slope = (errs[0] / errs[3]).ln() / (8.0f64).ln();
        assert!(
            (slope - 4.0).abs() < 0.2,
            "measured order {slope}, errors {errs:?}"
        );
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let rhs = |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = (0.4 - t).sqrt();
        let p = IvpProblem::new(&rhs, (0.0, 1.0), vec![0.0], 1e-10, vec![1.0]);
        assert!(matches!(solve_ivp(&p), Err(OdeError::NonFiniteRhs { .. })));
    }

    #[test]
    fn cumulative_constant_and_linear_are_exact() {
        let grid = uniform_grid(0.0, 4.0, 9);
        let f = |_t: f64| 2.5;
        let out = cumulative(&f, &grid).unwrap();
        for (t, v) in grid.iter().zip(&out) {
            assert_eq!(*v, 2.5 * t);
        }
        let f = |t: f64| t;
        let out = cumulative(&f, &grid).unwrap();
        for (t, v) in grid.iter().zip(&out) {
            assert_relative_eq!(*v, t * t / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cumulative_monochromatic_field() {
        // f(t) = e E0 + e E cos(w t)  ->  e E0 t + (e E / w) sin(w t)
        let (e, e0, efield, w) = (1.0, 0.4, 1.3, 2.5);
        let f = move |t: f64| e * e0 + e * efield * (w * t).cos();
        let grid = uniform_grid(0.0, 6.0, 31);
        let out = cumulative(&f, &grid).unwrap();
        for (t, v) in grid.iter().zip(&out) {
            let exact = e * e0 * t + e * efield / w * (w * t).sin();
            assert_relative_eq!(*v, exact, epsilon = 1e-11, max_relative = 1e-11);
        }
    }

    #[test]
    fn cumulative_is_additive() {
        let f = |t: f64| 3.0 * t * t - t + 1.0;
        let grid = uniform_grid(0.0, 2.0, 5);
        let out = cumulative(&f, &grid).unwrap();
        let a = 1.0;
        let b = 2.0;
        let fa = out[2];
        let fb = out[4];
        let seg = adaptive_simpson(&f, a, b, QUAD_TOL).unwrap();
        assert_relative_eq!(fb, fa + seg, epsilon = 1e-12);
    }

    #[test]
    fn iterated_integral_trivial_and_polynomial() {
        let zero = |_t: f64| 0.0;
        for depth in 1..=3 {
            let q = QuadratureSpec::new(&zero, depth, 3.0);
            assert_eq!(iterated_integral(&q).unwrap(), 0.0);
        }
        let one = |_t: f64| 1.0;
        let q = QuadratureSpec::new(&one, 2, 3.0);
        assert_relative_eq!(iterated_integral(&q).unwrap(), 4.5, epsilon = 1e-12);
        let q = QuadratureSpec::new(&one, 3, 2.0);
        assert_relative_eq!(iterated_integral(&q).unwrap(), 8.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn iterated_integral_cosine_depth_two() {
        // hand antiderivative: ∫∫ cos(w s) = (1 - cos(w t)) / w^2
        let w = 1.7;
        let f = move |t: f64| (w * t).cos();
        let q = QuadratureSpec::new(&f, 2, 2.0);
        let exact = (1.0 - (w * 2.0).cos()) / (w * w);
        assert_relative_eq!(iterated_integral(&q).unwrap(), exact, epsilon = 1e-11);
    }

    #[test]
    fn iterated_depth_two_matches_cumulative_of_cumulative() {
        let f = |t: f64| (0.9 * t).sin() + 0.3 * t;
        let t1 = 3.0;
        let q = QuadratureSpec::new(&f, 2, t1);
        let cascaded = iterated_integral(&q).unwrap();

        // route 1: cumulative applied twice, the inner one interpolated
        let grid = uniform_grid(0.0, t1, 601);
        let f1 = cumulative(&f, &grid).unwrap();
        let spline = crate::weinorman::CubicSpline::new(grid.clone(), f1).unwrap();
        let f1_fn = move |t: f64| spline.eval(t);
        let twice = cumulative(&f1_fn, &grid).unwrap();
        assert_relative_eq!(cascaded, *twice.last().unwrap(), epsilon = 1e-10);

        // route 2: the equivalent weighted single integral
        let weighted = move |s: f64| (t1 - s) * f(s);
        let oracle = adaptive_simpson(&weighted, 0.0, t1, QUAD_TOL).unwrap();
        assert_relative_eq!(cascaded, oracle, epsilon = 1e-10);
    }

    #[test]
    fn bad_depth_is_rejected() {
        let f = |_t: f64| 1.0;
        let q = QuadratureSpec::new(&f, 4, 1.0);
        assert!(matches!(iterated_integral(&q), Err(OdeError::BadDepth(4))));
    }
}
