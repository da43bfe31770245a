//! The generic Wei-Norman engine.
//!
//! Writing the solution of `ġ g⁻¹ = -Σ_α b_α(t) a_α`, `g(0) = e`, as an
//! ordered product of one-parameter exponentials
//! `g(t) = Π_k exp(-v_{o_k}(t) a_{o_k})` turns the group equation into a
//! coordinate system `M(v) v̇ = b(t)` with `v(0) = 0`, where the column of
//! `M` for the generator at order position `k` is
//! `(Π_{j<k} exp(-v_{o_j} ad(a_{o_j}))) e_{o_k}`.
//!
//! This module derives `M` from structure constants and a factorization
//! order, integrates the system, solves it by successive quadratures when the
//! dependency structure allows, and validates solved curves through the
//! right-invariant residual in a faithful matrix representation.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{AlgebraError, StructureConstants};
use crate::linalg;
use crate::matgroups::MatrixRep;
use crate::ode::{self, IvpProblem, OdeError};

/// Condition-number threshold above which the Wei-Norman matrix is treated
/// as a factorization breakdown.
pub const BREAKDOWN_COND: f64 = 1e12;

#[derive(Debug, Error)]
pub enum WnError {
    #[error("invalid factorization order {order:?}: must be a permutation of 0..{dim}")]
    BadOrder { order: Vec<usize>, dim: usize },
    #[error("control signal has {got} channels, algebra dimension is {expected}")]
    ControlDim { expected: usize, got: usize },
    #[error(
        "factorization breakdown{at}: Wei-Norman matrix condition {cond:.3e} exceeds {max:.1e}; \
         a different factorization order may stay regular",
        at = t.map(|t| format!(" at t = {t}")).unwrap_or_default()
    )]
    FactorizationBreakdown { t: Option<f64>, cond: f64, max: f64 },
    #[error("sampled control grid must be strictly increasing with at least 2 nodes")]
    BadSampleGrid,
    #[error("control signal not defined on [{t0}, {t1}]")]
    SignalSpan { t0: f64, t1: f64 },
    #[error("residual needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("trajectory must start at t = 0")]
    BadStart,
    #[error("representation has {rep} generators, algebra dimension is {algebra}")]
    RepMismatch { algebra: usize, rep: usize },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Permutation of `0..r` fixing the order of exponential factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationOrder(Vec<usize>);

impl FactorizationOrder {
    pub fn new(order: Vec<usize>, dim: usize) -> Result<Self, WnError> {
        let mut seen = vec![false; dim];
        let valid = order.len() == dim
            && order.iter().all(|&i| {
                if i >= dim || seen[i] {
                    false
                } else {
                    seen[i] = true;
                    true
                }
            });
        if !valid {
            return Err(WnError::BadOrder { order, dim });
        }
        Ok(FactorizationOrder(order))
    }

    pub fn ascending(dim: usize) -> Self {
        FactorizationOrder((0..dim).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One channel of a control signal.
#[derive(Debug, Clone)]
pub enum Channel {
    Zero,
    Constant(f64),
    /// `amp * sin(omega t + phase)`
    Sin { amp: f64, omega: f64, phase: f64 },
    /// `amp * cos(omega t)`
    Cos { amp: f64, omega: f64 },
    /// `c0 + c1 t + c2 t^2 + ...`
    Poly(Vec<f64>),
    /// Samples interpolated by a clamped cubic spline.
    Sampled(CubicSpline),
}

impl Channel {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Channel::Zero => 0.0,
            Channel::Constant(c) => *c,
            Channel::Sin { amp, omega, phase } => amp * (omega * t + phase).sin(),
            Channel::Cos { amp, omega } => amp * (omega * t).cos(),
            Channel::Poly(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            Channel::Sampled(s) => s.eval(t),
        }
    }

    /// Span on which the channel is defined (`None` = everywhere).
    fn span(&self) -> Option<(f64, f64)> {
        match self {
            Channel::Sampled(s) => Some((s.ts[0], *s.ts.last().unwrap())),
            _ => None,
        }
    }

    /// The channel multiplied by a constant.
    pub fn scaled(&self, k: f64) -> Channel {
        match self {
            Channel::Zero => Channel::Zero,
            Channel::Constant(c) => Channel::Constant(k * c),
            Channel::Sin { amp, omega, phase } => Channel::Sin {
                amp: k * amp,
                omega: *omega,
                phase: *phase,
            },
            Channel::Cos { amp, omega } => Channel::Cos {
                amp: k * amp,
                omega: *omega,
            },
            Channel::Poly(c) => Channel::Poly(c.iter().map(|&ci| k * ci).collect()),
            Channel::Sampled(s) => {
                let mut s = s.clone();
                for y in &mut s.ys {
                    *y *= k;
                }
                for m in &mut s.ms {
                    *m *= k;
                }
                Channel::Sampled(s)
            }
        }
    }
}

/// Map `t ↦ (b_1(t), ..., b_r(t))`.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    channels: Vec<Channel>,
}

impl ControlSignal {
    pub fn new(channels: Vec<Channel>) -> Self {
        ControlSignal { channels }
    }

    pub fn zero(dim: usize) -> Self {
        ControlSignal {
            channels: vec![Channel::Zero; dim],
        }
    }

    pub fn constants(values: &[f64]) -> Self {
        ControlSignal {
            channels: values.iter().map(|&c| Channel::Constant(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.channels) {
            *o = c.eval(t);
        }
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        DVector::from_fn(self.channels.len(), |i, _| self.channels[i].eval(t))
    }

    /// Extends the signal with zero channels up to `dim` (embedding the
    /// controls of a model into the full algebra).
    pub fn padded_to(&self, dim: usize) -> Self {
        let mut channels = self.channels.clone();
        channels.resize(dim.max(channels.len()), Channel::Zero);
        ControlSignal { channels }
    }

    pub fn check_span(&self, t0: f64, t1: f64) -> Result<(), WnError> {
        for c in &self.channels {
            if let Some((a, b)) = c.span() {
                if a > t0 + 1e-12 || b < t1 - 1e-12 {
                    return Err(WnError::SignalSpan { t0, t1 });
                }
            }
        }
        Ok(())
    }
}

/// Derivative at `at` of the Lagrange polynomial through `(ts, ys)`.
#[allow(clippy::needless_range_loop)]
fn lagrange_derivative(ts: &[f64], ys: &[f64], at: f64) -> f64 {
    let n = ts.len();
    let mut d = 0.0;
    for j in 0..n {
        let mut denom = 1.0;
        for k in 0..n {
            if k != j {
                denom *= ts[j] - ts[k];
            }
        }
        // derivative of prod_{k != j} (t - t_k) at `at`
        let mut num = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut term = 1.0;
            for k in 0..n {
                if k != j && k != m {
                    term *= at - ts[k];
                }
            }
            num += term;
        }
        d += ys[j] * num / denom;
    }
    d
}

/// Clamped cubic spline through strictly increasing sample times; endpoint
/// slopes come from one-sided Lagrange estimates.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    ts: Vec<f64>,
    ys: Vec<f64>,
    /// first derivative at each node
    ms: Vec<f64>,
}

impl CubicSpline {
    pub fn new(ts: Vec<f64>, ys: Vec<f64>) -> Result<Self, WnError> {
        if ts.len() < 2 || ts.len() != ys.len() || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WnError::BadSampleGrid);
        }
        let n = ts.len();
        if n == 2 {
            let m = (ys[1] - ys[0]) / (ts[1] - ts[0]);
            return Ok(CubicSpline {
                ts,
                ys,
                ms: vec![m, m],
            });
        }

        // end slopes from one-sided Lagrange derivatives on up to five
        // points, keeping the spline's interior convergence rate
        let k = n.min(5);
        let d0 = lagrange_derivative(&ts[..k], &ys[..k], ts[0]);
        let dn = lagrange_derivative(&ts[n - k..], &ys[n - k..], ts[n - 1]);

        // tridiagonal system for node slopes of the C^2 spline
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 1.0;
        rhs[0] = d0;
        diag[n - 1] = 1.0;
        rhs[n - 1] = dn;
        for i in 1..n - 1 {
            let hl = ts[i] - ts[i - 1];
            let hr = ts[i + 1] - ts[i];
            sub[i] = 1.0 / hl;
            diag[i] = 2.0 * (1.0 / hl + 1.0 / hr);
            sup[i] = 1.0 / hr;
            rhs[i] = 3.0 * ((ys[i] - ys[i - 1]) / (hl * hl) + (ys[i + 1] - ys[i]) / (hr * hr));
        }
        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut ms = vec![0.0; n];
        ms[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            ms[i] = (rhs[i] - sup[i] * ms[i + 1]) / diag[i];
        }
        Ok(CubicSpline { ts, ys, ms })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let t = t.clamp(self.ts[0], self.ts[n - 1]);
        let i = match self.ts.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.ts[i + 1] - self.ts[i];
        let s = (t - self.ts[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.ys[i]
            + (s3 - 2.0 * s2 + s) * h * self.ms[i]
            + (-2.0 * s3 + 3.0 * s2) * self.ys[i + 1]
            + (s3 - s2) * h * self.ms[i + 1]
    }
}

/// Time-stamped Wei-Norman coordinates `v(t)` with `v(0) = 0`.
#[derive(Debug, Clone)]
pub struct WeiNormanTrajectory {
    pub algebra: String,
    pub order: FactorizationOrder,
    pub times: Vec<f64>,
    pub coords: Vec<DVector<f64>>,
}

impl WeiNormanTrajectory {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// A structure-constant table paired with a factorization order and the
/// cached adjoint data needed to evaluate the Wei-Norman matrix quickly.
pub struct WnSystem {
    sc: StructureConstants,
    order: FactorizationOrder,
    ads: Vec<DMatrix<f64>>,
    /// powers `ad^j` up to the nilpotency index, when the adjoint is nilpotent
    nilpotent_powers: Vec<Option<Vec<DMatrix<f64>>>>,
}

impl WnSystem {
    pub fn new(sc: &StructureConstants, order: FactorizationOrder) -> Result<Self, WnError> {
        if order.len() != sc.dim() {
            return Err(WnError::BadOrder {
                order: order.indices().to_vec(),
                dim: sc.dim(),
            });
        }
        let r = sc.dim();
        let ads: Vec<DMatrix<f64>> = (0..r).map(|b| sc.ad_matrix(b).expect("index in range")).collect();
        let nilpotent_powers = ads
            .iter()
            .map(|ad| {
                linalg::nilpotency_index(ad, r).map(|k| {
                    let mut powers = Vec::with_capacity(k);
                    let mut p = DMatrix::identity(r, r);
                    for _ in 0..k {
                        powers.push(p.clone());
                        p = &p * ad;
                    }
                    powers
                })
            })
            .collect();
        Ok(WnSystem {
            sc: sc.clone(),
            order,
            ads,
            nilpotent_powers,
        })
    }

    pub fn from_ascending(sc: &StructureConstants) -> Self {
        Self::new(sc, FactorizationOrder::ascending(sc.dim())).expect("ascending order is valid")
    }

    pub fn dim(&self) -> usize {
        self.sc.dim()
    }

    pub fn order(&self) -> &FactorizationOrder {
        &self.order
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.sc
    }

    /// `exp(-v ad(a_beta))` using the cached nilpotency information.
    fn exp_ad(&self, v: f64, beta: usize) -> DMatrix<f64> {
        match &self.nilpotent_powers[beta] {
            Some(powers) => {
                let r = self.sc.dim();
                let mut sum = DMatrix::zeros(r, r);
                let mut coeff = 1.0;
                for (j, p) in powers.iter().enumerate() {
                    if j > 0 {
                        coeff *= -v / j as f64;
                    }
                    sum += p * coeff;
                }
                sum
            }
            None => linalg::expm(&(-v * &self.ads[beta])),
        }
    }

    /// The Wei-Norman matrix `M(v)`: solving `M(v) v̇ = b` gives the
    /// coordinate equations for this factorization order.
    pub fn matrix(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let r = self.sc.dim();
        let mut m = DMatrix::zeros(r, r);
        let mut prefix = DMatrix::identity(r, r);
        for (k, &alpha) in self.order.indices().iter().enumerate() {
            m.set_column(alpha, &prefix.column(alpha).into_owned());
            if k + 1 < r {
                prefix *= self.exp_ad(v[alpha], alpha);
            }
        }
        m
    }

    /// Unique solution of `M(v) v̇ = b`, with breakdown detection.
    pub fn rhs(&self, v: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>, WnError> {
        let m = self.matrix(v);
        match linalg::solve_with_cond(&m, b) {
            Some((x, cond)) if cond <= BREAKDOWN_COND => Ok(x),
            Some((_, cond)) => Err(WnError::FactorizationBreakdown {
                t: None,
                cond,
                max: BREAKDOWN_COND,
            }),
            None => Err(WnError::FactorizationBreakdown {
                t: None,
                cond: f64::INFINITY,
                max: BREAKDOWN_COND,
            }),
        }
    }

    /// Integrates `v̇ = M(v)⁻¹ b(t)` from `v(0) = 0`, sampling on `grid`
    /// (which must start at 0).
    pub fn integrate(
        &self,
        controls: &ControlSignal,
        span: (f64, f64),
        tol: f64,
        grid: &[f64],
    ) -> Result<WeiNormanTrajectory, WnError> {
        self.integrate_with(controls, span, tol, grid, ode::Method::AdaptiveRk45)
    }

    pub fn integrate_with(
        &self,
        controls: &ControlSignal,
        span: (f64, f64),
        tol: f64,
        grid: &[f64],
        method: ode::Method,
    ) -> Result<WeiNormanTrajectory, WnError> {
        let r = self.sc.dim();
        if controls.dim() != r {
            return Err(WnError::ControlDim {
                expected: r,
                got: controls.dim(),
            });
        }
        if span.0 != 0.0 || grid.first() != Some(&0.0) {
            return Err(WnError::BadStart);
        }
        controls.check_span(span.0, span.1)?;

        let breakdown: RefCell<Option<WnError>> = RefCell::new(None);
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let v = DVector::from_column_slice(y);
            let mut b = DVector::zeros(r);
            controls.eval_into(t, b.as_mut_slice());
            match self.rhs(&v, &b) {
                Ok(vdot) => dy.copy_from_slice(vdot.as_slice()),
                Err(e) => {
                    let e = match e {
                        WnError::FactorizationBreakdown { cond, max, .. } => {
                            WnError::FactorizationBreakdown {
                                t: Some(t),
                                cond,
                                max,
                            }
                        }
                        other => other,
                    };
                    *breakdown.borrow_mut() = Some(e);
                    dy.fill(f64::NAN);
                }
            }
        };

        let problem = IvpProblem {
            dim: r,
            rhs: &rhs,
            span,
            y0: vec![0.0; r],
            abs_tol: tol,
            rel_tol: tol,
            output: grid.to_vec(),
            method,
            max_step: Some(ode::dense_step_cap(span)),
        };
        let sol = match ode::solve_ivp(&problem) {
            Ok(sol) => sol,
            Err(e) => {
                return Err(breakdown.into_inner().unwrap_or(WnError::Ode(e)));
            }
        };

        let mut coords: Vec<DVector<f64>> = sol
            .states
            .iter()
            .map(|s| DVector::from_column_slice(s))
            .collect();
        coords[0] = DVector::zeros(r);
        Ok(WeiNormanTrajectory {
            algebra: self.sc.name().to_string(),
            order: self.order.clone(),
            times: sol.times,
            coords,
        })
    }

    /// Group curve in a matrix representation:
    /// `g(t_i) = Π_k exp(-v_{o_k}(t_i) ρ(a_{o_k}))`.
    pub fn group_curve(
        &self,
        rep: &MatrixRep,
        wn: &WeiNormanTrajectory,
    ) -> Result<Vec<DMatrix<f64>>, WnError> {
        if rep.generator_count() != self.sc.dim() {
            return Err(WnError::RepMismatch {
                algebra: self.sc.dim(),
                rep: rep.generator_count(),
            });
        }
        Ok(wn
            .coords
            .iter()
            .map(|v| rep.product_of_exponentials(self.order.indices(), v))
            .collect())
    }

    /// Maximum Frobenius norm of `ġ g⁻¹ + Σ_α b_α ρ(a_α)` over the interior
    /// samples, with `ġ` from central differences on the sample grid.
    pub fn residual(
        &self,
        rep: &MatrixRep,
        wn: &WeiNormanTrajectory,
        controls: &ControlSignal,
    ) -> Result<f64, WnError> {
        if wn.len() < 3 {
            return Err(WnError::TooFewSamples(wn.len()));
        }
        let gs = self.group_curve(rep, wn)?;
        let mut worst: f64 = 0.0;
        for i in 1..gs.len() - 1 {
            let hl = wn.times[i] - wn.times[i - 1];
            let hr = wn.times[i + 1] - wn.times[i];
            // second-order derivative on a possibly nonuniform grid
            let gdot = (&gs[i + 1] * (hl / (hr * (hl + hr))))
                - (&gs[i - 1] * (hr / (hl * (hl + hr))))
                + (&gs[i] * ((hr - hl) / (hl * hr)));
            let ginv = gs[i]
                .clone()
                .try_inverse()
                .ok_or(WnError::FactorizationBreakdown {
                    t: Some(wn.times[i]),
                    cond: f64::INFINITY,
                    max: BREAKDOWN_COND,
                })?;
            let mut drift = &gdot * &ginv;
            let b = controls.eval(wn.times[i]);
            for alpha in 0..self.sc.dim() {
                drift += rep.generator(alpha) * b[alpha];
            }
            worst = worst.max(drift.norm());
        }
        Ok(worst)
    }

    /// Numeric dependency structure of the solved system: `dep[j][i]` is true
    /// when `v̇_j` depends on `v_i`, probed at seeded random points.
    fn dependency_matrix(&self) -> Result<Vec<Vec<bool>>, WnError> {
        let r = self.sc.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let mut dep = vec![vec![false; r]; r];
        let mut probes = 0;
        while probes < 24 {
            let v = DVector::from_fn(r, |_, _| rng.gen_range(-0.8..0.8));
            let b = DVector::from_fn(r, |_, _| rng.gen_range(-1.0..1.0));
            let base = match self.rhs(&v, &b) {
                Ok(x) => x,
                Err(_) => continue, // singular probe point, resample
            };
            for i in 0..r {
                let mut v2 = v.clone();
                v2[i] = rng.gen_range(-0.8..0.8);
                let Ok(shifted) = self.rhs(&v2, &b) else {
                    continue;
                };
                for j in 0..r {
                    if (shifted[j] - base[j]).abs() > 1e-9 * (1.0 + base[j].abs()) {
                        dep[j][i] = true;
                    }
                }
            }
            probes += 1;
        }
        Ok(dep)
    }

    /// Sequence in which the components can be solved one quadrature at a
    /// time, or `None` when the dependency graph has no such ordering.
    pub fn quadrature_sequence(&self) -> Result<Option<Vec<usize>>, WnError> {
        let r = self.sc.dim();
        let dep = self.dependency_matrix()?;
        let mut solved = vec![false; r];
        let mut sequence = Vec::with_capacity(r);
        for _ in 0..r {
            let next = (0..r).find(|&j| {
                !solved[j] && (0..r).all(|i| !dep[j][i] || (solved[i] && i != j))
            });
            match next {
                Some(j) => {
                    solved[j] = true;
                    sequence.push(j);
                }
                None => return Ok(None),
            }
        }
        Ok(Some(sequence))
    }

    /// Solves the system by successive numerical quadratures when the
    /// triangular dependency check passes; `Ok(None)` means the system is not
    /// reducible to quadratures for this order.
    pub fn solve_by_quadratures(
        &self,
        controls: &ControlSignal,
        span: (f64, f64),
        grid: &[f64],
    ) -> Result<Option<WeiNormanTrajectory>, WnError> {
        let r = self.sc.dim();
        if controls.dim() != r {
            return Err(WnError::ControlDim {
                expected: r,
                got: controls.dim(),
            });
        }
        if span.0 != 0.0 || grid.first() != Some(&0.0) {
            return Err(WnError::BadStart);
        }
        controls.check_span(span.0, span.1)?;
        let Some(sequence) = self.quadrature_sequence()? else {
            return Ok(None);
        };

        // refine the output grid so its points are exact internal nodes
        let out_panels = grid.len() - 1;
        let refine = 8192_usize.div_ceil(out_panels);
        let n = out_panels * refine;
        let h = (span.1 - span.0) / n as f64;
        let node = |k: usize| span.0 + k as f64 * h;

        let mut values = vec![vec![0.0; n + 1]; r]; // v_j at nodes
        let mut mid_values = vec![vec![0.0; n]; r]; // v_j at panel midpoints

        let eval_rhs_at = |t: f64, point: &DVector<f64>, j: usize| -> Result<f64, WnError> {
            let b = {
                let mut b = DVector::zeros(r);
                controls.eval_into(t, b.as_mut_slice());
                b
            };
            let vdot = self.rhs(point, &b).map_err(|e| match e {
                WnError::FactorizationBreakdown { cond, max, .. } => {
                    WnError::FactorizationBreakdown {
                        t: Some(t),
                        cond,
                        max,
                    }
                }
                other => other,
            })?;
            Ok(vdot[j])
        };

        for &j in &sequence {
            // integrand at nodes and midpoints; unsolved components enter as
            // zero, which cannot affect the result by the dependency check
            let mut g_nodes = vec![0.0; n + 1];
            let mut g_mids = vec![0.0; n];
            for k in 0..=n {
                let point = DVector::from_fn(r, |i, _| values[i][k]);
                g_nodes[k] = eval_rhs_at(node(k), &point, j)?;
            }
            for k in 0..n {
                let t = node(k) + 0.5 * h;
                let point = DVector::from_fn(r, |i, _| mid_values[i][k]);
                g_mids[k] = eval_rhs_at(t, &point, j)?;
            }
            let mut acc = 0.0;
            for k in 0..n {
                values[j][k + 1] = {
                    acc += h / 6.0 * (g_nodes[k] + 4.0 * g_mids[k] + g_nodes[k + 1]);
                    acc
                };
            }
            // midpoint values of the newly solved component, for later integrands:
            // cubic Hermite using the integrand itself as the exact slope
            for k in 0..n {
                mid_values[j][k] = 0.5 * (values[j][k] + values[j][k + 1])
                    + h / 8.0 * (g_nodes[k] - g_nodes[k + 1]);
            }
        }

        let coords = (0..grid.len())
            .map(|gi| DVector::from_fn(r, |i, _| values[i][gi * refine]))
            .collect();
        Ok(Some(WeiNormanTrajectory {
            algebra: self.sc.name().to_string(),
            order: self.order.clone(),
            times: grid.to_vec(),
            coords,
        }))
    }
}

/// Wei-Norman matrix `M(v)` for the given order (free-function form).
pub fn wn_matrix(
    sc: &StructureConstants,
    order: &FactorizationOrder,
    v: &DVector<f64>,
) -> Result<DMatrix<f64>, WnError> {
    Ok(WnSystem::new(sc, order.clone())?.matrix(v))
}

/// Solution of `M(v) v̇ = b` (free-function form).
pub fn wn_rhs(
    sc: &StructureConstants,
    order: &FactorizationOrder,
    v: &DVector<f64>,
    b: &DVector<f64>,
) -> Result<DVector<f64>, WnError> {
    WnSystem::new(sc, order.clone())?.rhs(v, b)
}
