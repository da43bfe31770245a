//! Time-dependent quadratic Hamiltonians
//! `H = α p²/2 + β qp/2 + γ q²/2 + δ p + ε q (+ φ)` and the Poisson-bracket
//! structure of their component Hamiltonian functions.

use super::ModelError;
use crate::weinorman::{Channel, ControlSignal};

/// Classical Hamiltonians use five coefficients; the quantum version adds
/// the multiple `φ(t)` of the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Classical,
    Quantum,
}

/// The six coefficient signals of a quadratic Hamiltonian. In classical mode
/// `phi` is ignored.
#[derive(Debug, Clone)]
pub struct QuadraticCoeffs {
    pub alpha: Channel,
    pub beta: Channel,
    pub gamma: Channel,
    pub delta: Channel,
    pub epsilon: Channel,
    pub phi: Channel,
    pub mode: Mode,
}

impl QuadraticCoeffs {
    pub fn classical(
        alpha: Channel,
        beta: Channel,
        gamma: Channel,
        delta: Channel,
        epsilon: Channel,
    ) -> Self {
        QuadraticCoeffs {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            phi: Channel::Zero,
            mode: Mode::Classical,
        }
    }

    pub fn quantum(
        alpha: Channel,
        beta: Channel,
        gamma: Channel,
        delta: Channel,
        epsilon: Channel,
        phi: Channel,
    ) -> Self {
        QuadraticCoeffs {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            phi,
            mode: Mode::Quantum,
        }
    }

    /// Control vector for the group equation:
    /// `b = (α, β, γ, -δ, ε)` and, in quantum mode, `b6 = -φ`.
    pub fn control_signal(&self) -> ControlSignal {
        let mut channels = vec![
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma.clone(),
            self.delta.scaled(-1.0),
            self.epsilon.clone(),
        ];
        if self.mode == Mode::Quantum {
            channels.push(self.phi.scaled(-1.0));
        }
        ControlSignal::new(channels)
    }

    pub fn algebra_key(&self) -> &'static str {
        match self.mode {
            Mode::Classical => "g5",
            Mode::Quantum => "hsp2",
        }
    }

    fn eval(&self, t: f64) -> (f64, f64, f64, f64, f64) {
        (
            self.alpha.eval(t),
            self.beta.eval(t),
            self.gamma.eval(t),
            self.delta.eval(t),
            self.epsilon.eval(t),
        )
    }
}

/// The Hamiltonian vector field of the classical quadratic Hamiltonian:
/// `q̇ = α p + β q/2 + δ`, `ṗ = -(β p/2 + γ q + ε)`.
pub fn classical_quadratic_field(coeffs: &QuadraticCoeffs, t: f64, q: f64, p: f64) -> (f64, f64) {
    let (alpha, beta, gamma, delta, epsilon) = coeffs.eval(t);
    (
        alpha * p + 0.5 * beta * q + delta,
        -(0.5 * beta * p + gamma * q + epsilon),
    )
}

/// The catalogued Hamiltonian-function sets whose Poisson brackets close on
/// a central extension of the vector-field algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianSet {
    /// `h1 = -p²/2, h2 = -qp/2, h3 = -q²/2, h4 = p, h5 = -q`
    Quadratic,
    /// `h1 = -p²/2, h2 = q, h3 = -p, h4 = 1`
    LinearPotential,
}

/// A real quadratic polynomial on the phase plane, with coefficients over
/// the monomials `(1, q, p, q², qp, p²)`. All catalogued Hamiltonians are of
/// this form, so Poisson brackets can be differentiated exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoly {
    pub c: [f64; 6],
}

impl PhasePoly {
    const ZERO: PhasePoly = PhasePoly { c: [0.0; 6] };

    fn d_dq(&self) -> (f64, f64, f64) {
        // linear polynomial (const, q, p)
        (self.c[1], 2.0 * self.c[3], self.c[4])
    }

    fn d_dp(&self) -> (f64, f64, f64) {
        (self.c[2], self.c[4], 2.0 * self.c[5])
    }

    /// `{f, g} = f_q g_p - f_p g_q`, exact for quadratics.
    pub fn poisson(&self, other: &PhasePoly) -> PhasePoly {
        let (a0, aq, ap) = self.d_dq();
        let (b0, bq, bp) = other.d_dp();
        let (c0, cq, cp) = self.d_dp();
        let (d0, dq, dp) = other.d_dq();
        let mut out = PhasePoly::ZERO;
        let mut add = |l: (f64, f64, f64), r: (f64, f64, f64), sign: f64| {
            // (l0 + lq q + lp p)(r0 + rq q + rp p)
            out.c[0] += sign * l.0 * r.0;
            out.c[1] += sign * (l.0 * r.1 + l.1 * r.0);
            out.c[2] += sign * (l.0 * r.2 + l.2 * r.0);
            out.c[3] += sign * l.1 * r.1;
            out.c[4] += sign * (l.1 * r.2 + l.2 * r.1);
            out.c[5] += sign * l.2 * r.2;
        };
        add((a0, aq, ap), (b0, bq, bp), 1.0);
        add((c0, cq, cp), (d0, dq, dp), -1.0);
        out
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        self.c[0] + self.c[1] * q + self.c[2] * p + self.c[3] * q * q + self.c[4] * q * p
            + self.c[5] * p * p
    }
}

fn catalog(set: HamiltonianSet) -> Vec<(&'static str, PhasePoly)> {
    match set {
        HamiltonianSet::Quadratic => vec![
            ("h1", PhasePoly { c: [0.0, 0.0, 0.0, 0.0, 0.0, -0.5] }),
            ("h2", PhasePoly { c: [0.0, 0.0, 0.0, 0.0, -0.5, 0.0] }),
            ("h3", PhasePoly { c: [0.0, 0.0, 0.0, -0.5, 0.0, 0.0] }),
            ("h4", PhasePoly { c: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0] }),
            ("h5", PhasePoly { c: [0.0, -1.0, 0.0, 0.0, 0.0, 0.0] }),
        ],
        HamiltonianSet::LinearPotential => vec![
            ("h1", PhasePoly { c: [0.0, 0.0, 0.0, 0.0, 0.0, -0.5] }),
            ("h2", PhasePoly { c: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0] }),
            ("h3", PhasePoly { c: [0.0, 0.0, -1.0, 0.0, 0.0, 0.0] }),
        ],
    }
}

/// Decomposition of a Poisson bracket `{h_i, h_j}` over the catalogued set:
/// the coefficients on each `h_k` plus the central (constant) charge.
#[derive(Debug, Clone)]
pub struct BracketReport {
    pub set: HamiltonianSet,
    pub left: String,
    pub right: String,
    /// coefficient of each catalogued function, in catalog order
    pub coefficients: Vec<f64>,
    /// the constant term — the central charge of the extension
    pub central_charge: f64,
    /// residual of the decomposition (zero for a closed set)
    pub residual: f64,
}

impl std::fmt::Display for BracketReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}, {}}} =", self.left, self.right)?;
        let mut any = false;
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.abs() > 1e-14 {
                write!(f, " {:+} h{}", c, i + 1)?;
                any = true;
            }
        }
        if self.central_charge.abs() > 1e-14 {
            write!(f, " {:+}", self.central_charge)?;
            any = true;
        }
        if !any {
            write!(f, " 0")?;
        }
        Ok(())
    }
}

/// Evaluates `{h_i, h_j}` on the catalogued polynomial forms by exact
/// differentiation and decomposes the result over the set plus a constant.
pub fn poisson_bracket(
    set: HamiltonianSet,
    left: &str,
    right: &str,
) -> Result<BracketReport, ModelError> {
    let cat = catalog(set);
    let find = |key: &str| {
        cat.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, h)| *h)
            .ok_or_else(|| ModelError::UnknownHamiltonian {
                key: key.to_string(),
                set,
            })
    };
    let hl = find(left)?;
    let hr = find(right)?;
    let bracket = hl.poisson(&hr);

    // the catalogued functions are monomials with disjoint support, so the
    // decomposition reads off coefficients directly
    let mut remaining = bracket;
    let mut coefficients = Vec::with_capacity(cat.len());
    for (_, h) in &cat {
        let pivot = h.c.iter().enumerate().find(|(_, v)| v.abs() > 0.0).unwrap();
        let lambda = remaining.c[pivot.0] / pivot.1;
        coefficients.push(lambda);
        for i in 0..6 {
            remaining.c[i] -= lambda * h.c[i];
        }
    }
    let central_charge = remaining.c[0];
    remaining.c[0] = 0.0;
    let residual = remaining.c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(BracketReport {
        set,
        left: left.to_string(),
        right: right.to_string(),
        coefficients,
        central_charge,
        residual,
    })
}
