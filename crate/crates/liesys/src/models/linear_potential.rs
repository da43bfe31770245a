//! The time-dependent linear potential `H = p²/(2m) + f(t) q`: classical
//! closed-form flow, constants of motion, the quantum quadrature vectors for
//! the two factor orderings of the evolution operator, and momentum-space
//! wavefunction evolution.

use num_complex::Complex64;

use super::ModelError;
use crate::ode::{self, QuadratureSpec};
use crate::weinorman::Channel;

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

/// Which ordering of the evolution-operator factors to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOrdering {
    /// `exp(-i u4) exp(i u3 P) exp(-i u2 Q) exp(i u1 P²/2)`
    U,
    /// the ordering whose rightmost factors act diagonally in momentum space
    V,
}

/// Factor parameters of the evolution operator in the `U` ordering,
/// `U = exp(-i scalar) exp(i momentum_linear P) exp(-i position_linear Q) exp(i kinetic P²/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionOperatorFactors {
    pub scalar: f64,
    pub momentum_linear: f64,
    pub position_linear: f64,
    pub kinetic: f64,
}

impl std::fmt::Display for EvolutionOperatorFactors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "exp(-i {:.6e}) exp(i {:.6e} P) exp(-i {:.6e} Q) exp(i {:.6e} P^2/2)",
            self.scalar, self.momentum_linear, self.position_linear, self.kinetic
        )
    }
}

/// Complex samples on a uniform momentum grid, normalized as `Σ|φ|² Δp`.
#[derive(Debug, Clone)]
pub struct WaveFunctionGrid {
    pub p_start: f64,
    pub dp: f64,
    pub values: Vec<Complex64>,
}

impl WaveFunctionGrid {
    pub fn new(p_start: f64, dp: f64, values: Vec<Complex64>) -> Self {
        assert!(dp > 0.0, "grid spacing must be positive");
        WaveFunctionGrid {
            p_start,
            dp,
            values,
        }
    }

    /// Normalized Gaussian centered at `mean` with width `sigma`, sampled on
    /// `n` points spanning `[-p_max, p_max]`.
    pub fn gaussian(n: usize, p_max: f64, mean: f64, sigma: f64) -> Self {
        let dp = 2.0 * p_max / (n - 1) as f64;
        let mut values: Vec<Complex64> = (0..n)
            .map(|i| {
                let p = -p_max + i as f64 * dp;
                Complex64::new((-((p - mean) / sigma).powi(2) / 2.0).exp(), 0.0)
            })
            .collect();
        let norm = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dp).sqrt();
        for v in &mut values {
            *v /= norm;
        }
        WaveFunctionGrid {
            p_start: -p_max,
            dp,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn p_at(&self, i: usize) -> f64 {
        self.p_start + i as f64 * self.dp
    }

    /// `sqrt(Σ |φ_i|² Δp)`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dp).sqrt()
    }

    /// `Σ p |φ|² Δp / Σ |φ|² Δp`.
    pub fn mean_momentum(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = v.norm_sqr();
            num += self.p_at(i) * w;
            den += w;
        }
        num / den
    }

    /// Pointwise maximum modulus of the difference with another grid.
    pub fn max_difference(&self, other: &WaveFunctionGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Samples `φ(p + shift)` by cubic interpolation (exact reindexing when
    /// the shift is a whole number of grid steps), treating the wavefunction
    /// as zero outside its support. Also returns the squared-norm mass
    /// shifted beyond the window.
    fn shifted(&self, shift: f64) -> (Vec<Complex64>, f64) {
        let n = self.values.len();
        let steps = shift / self.dp;
        let round = steps.round();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if (steps - round).abs() < 1e-9 {
            let k = round as i64;
            for (i, o) in out.iter_mut().enumerate() {
                let j = i as i64 + k;
                if (0..n as i64).contains(&j) {
                    *o = self.values[j as usize];
                }
            }
        } else {
            let at = |j: i64| -> Complex64 {
                if (0..n as i64).contains(&j) {
                    self.values[j as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            };
            for (i, o) in out.iter_mut().enumerate() {
                let x = i as f64 + steps;
                let j = x.floor() as i64;
                let s = x - j as f64;
                // Hermite with symmetric-difference slopes
                let (y0, y1, y2, y3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
                let m1 = (y2 - y0) * 0.5;
                let m2 = (y3 - y1) * 0.5;
                let s2 = s * s;
                let s3 = s2 * s;
                *o = y1 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + m1 * (s3 - 2.0 * s2 + s)
                    + y2 * (-2.0 * s3 + 3.0 * s2)
                    + m2 * (s3 - s2);
            }
        }
        // mass of the source samples that no target sample can reach
        let lost: f64 = (0..n as i64)
            .filter(|&j| {
                let target = j as f64 - steps;
                target < -0.5 || target > (n - 1) as f64 + 0.5
            })
            .map(|j| self.values[j as usize].norm_sqr() * self.dp)
            .sum();
        (out, lost)
    }
}

/// Result of a wavefunction evolution: the new grid plus the squared-norm
/// mass the momentum shift pushed outside the grid support.
#[derive(Debug, Clone)]
pub struct EvolvedWaveFunction {
    pub grid: WaveFunctionGrid,
    pub lost_mass: f64,
}

impl EvolvedWaveFunction {
    /// Whether the shift left the grid support enough to matter.
    pub fn truncated(&self, threshold: f64) -> bool {
        self.lost_mass > threshold
    }
}

/// The system `H = p²/(2m) + f(t) q`.
pub struct LinearPotential {
    mass: f64,
    force: Channel,
}

impl LinearPotential {
    pub fn new(mass: f64, force: Channel) -> Result<Self, ModelError> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(ModelError::BadMass(mass));
        }
        Ok(LinearPotential { mass, force })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn force(&self) -> &Channel {
        &self.force
    }

    fn f1(&self, t: f64) -> Result<f64, ModelError> {
        let f = |s: f64| self.force.eval(s);
        Ok(ode::adaptive_simpson(&f, 0.0, t, ode::QUAD_TOL)?)
    }

    fn f2(&self, t: f64) -> Result<f64, ModelError> {
        let f = |s: f64| self.force.eval(s);
        Ok(ode::iterated_integral(&QuadratureSpec::new(&f, 2, t))?)
    }

    /// Closed-form flow: `p(t) = p0 - ∫f`, `q(t) = q0 + p0 t/m - (1/m)∫∫f`.
    pub fn classical_state(&self, q0: f64, p0: f64, t: f64) -> Result<PhasePoint, ModelError> {
        Ok(PhasePoint {
            q: q0 + p0 * t / self.mass - self.f2(t)? / self.mass,
            p: p0 - self.f1(t)?,
        })
    }

    /// The two conserved quantities of the flow, from the state at time `t`:
    /// `I1 = p + ∫f`, `I2 = q - (p + ∫f) t/m + (1/m)∫∫f`. At `t = 0` they
    /// reduce to `(p0, q0)`.
    pub fn constants_of_motion(&self, x: PhasePoint, t: f64) -> Result<(f64, f64), ModelError> {
        let f1 = self.f1(t)?;
        let i1 = x.p + f1;
        let i2 = x.q - (x.p + f1) * t / self.mass + self.f2(t)? / self.mass;
        Ok((i1, i2))
    }

    /// Quadrature profile shared by the quantum vectors: `F1 = ∫f` and
    /// `F2 = ∫F1` on a half-step grid, plus `∫ f F2` and `∫ F1²`.
    fn quantum_profile(&self, t: f64) -> Result<(f64, f64, f64, f64), ModelError> {
        if t == 0.0 {
            return Ok((0.0, 0.0, 0.0, 0.0));
        }
        let n = 4096usize;
        let h = t / n as f64;
        // force sampled at quarter steps: index k holds f(k h / 4)
        let f_quarter: Vec<f64> = (0..=4 * n)
            .map(|k| self.force.eval(k as f64 * h / 4.0))
            .collect();
        // F1 at half steps by per-half-panel Simpson
        let mut f1_half = vec![0.0; 2 * n + 1];
        for j in 0..2 * n {
            let seg = (h / 2.0) / 6.0
                * (f_quarter[2 * j] + 4.0 * f_quarter[2 * j + 1] + f_quarter[2 * j + 2]);
            f1_half[j + 1] = f1_half[j] + seg;
        }
        // F2 at half steps: Hermite panels with exact slope F2' = F1
        let mut f2_half = vec![0.0; 2 * n + 1];
        for j in 0..2 * n {
            let step = h / 2.0;
            // Hermite panel integral with exact slopes F2' = F1 ... F1' = f
            f2_half[j + 1] = f2_half[j]
                + 0.5 * step * (f1_half[j] + f1_half[j + 1])
                + step * step / 12.0 * (f_quarter[2 * j] - f_quarter[2 * j + 2]);
        }
        // ∫ f F2 and ∫ F1² over full panels by Simpson on the half grid
        let mut int_f_f2 = 0.0;
        let mut int_f1_sq = 0.0;
        for k in 0..n {
            let (i0, i1, i2) = (2 * k, 2 * k + 1, 2 * k + 2);
            let g0 = f_quarter[4 * k] * f2_half[i0];
            let g1 = f_quarter[4 * k + 2] * f2_half[i1];
            let g2 = f_quarter[4 * k + 4] * f2_half[i2];
            int_f_f2 += h / 6.0 * (g0 + 4.0 * g1 + g2);
            let s0 = f1_half[i0] * f1_half[i0];
            let s1 = f1_half[i1] * f1_half[i1];
            let s2 = f1_half[i2] * f1_half[i2];
            int_f1_sq += h / 6.0 * (s0 + 4.0 * s1 + s2);
        }
        Ok((
            f1_half[2 * n],
            f2_half[2 * n],
            int_f_f2,
            int_f1_sq,
        ))
    }

    /// The four quadratures of the `U` ordering:
    /// `u1 = t/m`, `u2 = -∫f`, `u3 = (1/m)∫∫f`,
    /// `u4 = (1/m)∫ f ∫∫f + (1/2m)∫ (∫f)²`.
    pub fn quantum_u(&self, t: f64) -> Result<[f64; 4], ModelError> {
        let (f1, f2, int_f_f2, int_f1_sq) = self.quantum_profile(t)?;
        Ok([
            t / self.mass,
            -f1,
            f2 / self.mass,
            int_f_f2 / self.mass + int_f1_sq / (2.0 * self.mass),
        ])
    }

    /// The four quadratures of the `V` ordering: same first three components,
    /// `v4 = -(1/2m)∫ (∫f)²`.
    pub fn quantum_v(&self, t: f64) -> Result<[f64; 4], ModelError> {
        let (f1, f2, _, int_f1_sq) = self.quantum_profile(t)?;
        Ok([
            t / self.mass,
            -f1,
            f2 / self.mass,
            -int_f1_sq / (2.0 * self.mass),
        ])
    }

    /// Factor parameters of the evolution operator in the `U` ordering.
    pub fn evolution_operator_factors(
        &self,
        t: f64,
    ) -> Result<EvolutionOperatorFactors, ModelError> {
        let u = self.quantum_u(t)?;
        Ok(EvolutionOperatorFactors {
            scalar: u[3],
            momentum_linear: u[2],
            position_linear: u[1],
            kinetic: u[0],
        })
    }

    /// Applies the evolution operator to a momentum-space wavefunction.
    ///
    /// In momentum representation every factor except the argument shift is
    /// a multiplication by an explicit phase, so the result is
    /// `φ(p, t) = exp(i Θ(p)) φ0(p + shift)` with `Θ` accumulated
    /// analytically per ordering; only `φ0` is interpolated.
    pub fn apply_evolution(
        &self,
        phi0: &WaveFunctionGrid,
        t: f64,
        ordering: FactorOrdering,
    ) -> Result<EvolvedWaveFunction, ModelError> {
        let (shift, theta): (f64, Box<dyn Fn(f64) -> f64>) = match ordering {
            FactorOrdering::U => {
                let u = self.quantum_u(t)?;
                (
                    u[1],
                    Box::new(move |p: f64| -u[3] + u[2] * p + u[0] * (p + u[1]).powi(2) / 2.0),
                )
            }
            FactorOrdering::V => {
                let v = self.quantum_v(t)?;
                (
                    v[1],
                    Box::new(move |p: f64| {
                        -v[3] + v[2] * (p + v[1]) + v[0] * (p + v[1]).powi(2) / 2.0
                    }),
                )
            }
        };
        let (shifted, lost_mass) = phi0.shifted(shift);
        let values = shifted
            .into_iter()
            .enumerate()
            .map(|(i, v)| v * Complex64::from_polar(1.0, theta(phi0.p_at(i))))
            .collect();
        Ok(EvolvedWaveFunction {
            grid: WaveFunctionGrid {
                p_start: phi0.p_start,
                dp: phi0.dp,
                values,
            },
            lost_mass,
        })
    }

    /// The phase-and-shift evolution map in its standard (`V`) ordering.
    pub fn evolve_wavefunction(
        &self,
        phi0: &WaveFunctionGrid,
        t: f64,
    ) -> Result<EvolvedWaveFunction, ModelError> {
        self.apply_evolution(phi0, t, FactorOrdering::V)
    }
}
