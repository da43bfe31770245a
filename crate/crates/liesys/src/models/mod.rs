//! The bundled systems: time-dependent quadratic Hamiltonians (classical and
//! quantum), the time-dependent linear potential with its closed forms, and
//! four control-theory examples. Every Lie-system model is exposed both as a
//! raw coordinate ODE (the reference path) and as a scenario for the
//! Wei-Norman engine, so the two solution routes can be compared.

mod linear_potential;
mod quadratic;
mod riccati;

pub use linear_potential::{
    EvolutionOperatorFactors, FactorOrdering, LinearPotential, PhasePoint, WaveFunctionGrid,
};
pub use quadratic::{
    classical_quadratic_field, poisson_bracket, BracketReport, HamiltonianSet, Mode, PhasePoly,
    QuadraticCoeffs,
};
pub use riccati::{cross_ratio, riccati_superpose};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra;
use crate::linalg;
use crate::matgroups::{Chart, MatGroupError, Reconstruction, StateTrajectory};
use crate::ode::{self, IvpProblem, OdeError};
use crate::weinorman::{ControlSignal, FactorizationOrder, WnError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("`{0}` is not a Lie system: its iterated input brackets keep producing new directions")]
    NotALieSystem(String),
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    #[error("state vector has length {got}, model needs {expected}")]
    BadState { expected: usize, got: usize },
    #[error("control signal has {got} channels, model needs {expected}")]
    BadControls { expected: usize, got: usize },
    #[error("unknown Hamiltonian key `{key}` in set {set:?}")]
    UnknownHamiltonian { key: String, set: HamiltonianSet },
    #[error("cross-ratio denominator is degenerate")]
    DegenerateCrossRatio,
    #[error("particular solutions must be pairwise distinct")]
    NotDistinct,
    #[error("probe depth must be at most 5, got {0}")]
    ProbeDepth(usize),
    #[error(transparent)]
    Wn(#[from] WnError),
    #[error(transparent)]
    MatGroup(#[from] MatGroupError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Keys of the bundled control systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKey {
    UnicycleX,
    UnicycleY,
    Brockett,
    HopperExact,
    HopperLinear,
    /// eps in {-1, 0, 1}
    ElasticEuler(i8),
}

impl SystemKey {
    pub fn parse(s: &str) -> Option<SystemKey> {
        Some(match s {
            "unicycle-x" => SystemKey::UnicycleX,
            "unicycle-y" => SystemKey::UnicycleY,
            "brockett" => SystemKey::Brockett,
            "hopper-exact" => SystemKey::HopperExact,
            "hopper-linear" => SystemKey::HopperLinear,
            "elastic-euler(-1)" => SystemKey::ElasticEuler(-1),
            "elastic-euler(0)" => SystemKey::ElasticEuler(0),
            "elastic-euler(1)" | "elastic-euler(+1)" => SystemKey::ElasticEuler(1),
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            SystemKey::UnicycleX => "unicycle-x".into(),
            SystemKey::UnicycleY => "unicycle-y".into(),
            SystemKey::Brockett => "brockett".into(),
            SystemKey::HopperExact => "hopper-exact".into(),
            SystemKey::HopperLinear => "hopper-linear".into(),
            SystemKey::ElasticEuler(e) => format!("elastic-euler({e})"),
        }
    }

    /// All bundled keys, in catalog order.
    pub fn all() -> Vec<SystemKey> {
        vec![
            SystemKey::UnicycleX,
            SystemKey::UnicycleY,
            SystemKey::Brockett,
            SystemKey::HopperExact,
            SystemKey::HopperLinear,
            SystemKey::ElasticEuler(-1),
            SystemKey::ElasticEuler(0),
            SystemKey::ElasticEuler(1),
        ]
    }
}

/// A drift-free control system `ẋ = Σ b_α(t) X_α(x)` with its direct
/// right-hand side and, when the inputs close on a finite-dimensional
/// algebra, the data needed to solve it through the group.
#[derive(Debug, Clone)]
pub struct ControlSystemDef {
    pub key: SystemKey,
    /// Leg mass of the hopping robot (ignored elsewhere).
    pub leg_mass: f64,
}

/// Everything the Wei-Norman path needs for one model.
#[derive(Debug, Clone)]
pub struct LieScenario {
    pub algebra_key: &'static str,
    pub order: FactorizationOrder,
    pub reconstruction: Reconstruction,
}

impl ControlSystemDef {
    pub fn new(key: SystemKey) -> Self {
        ControlSystemDef { key, leg_mass: 1.0 }
    }

    pub fn with_leg_mass(key: SystemKey, leg_mass: f64) -> Self {
        ControlSystemDef { key, leg_mass }
    }

    pub fn state_dim(&self) -> usize {
        3
    }

    pub fn control_dim(&self) -> usize {
        match self.key {
            SystemKey::ElasticEuler(_) => 3,
            _ => 2,
        }
    }

    /// `k1 = m_l / (1 + m_l)` for the hopping robot.
    pub fn k1(&self) -> f64 {
        self.leg_mass / (1.0 + self.leg_mass)
    }

    /// `k2 = 2 m_l / (1 + m_l)^2` for the hopping robot.
    pub fn k2(&self) -> f64 {
        2.0 * self.leg_mass / (1.0 + self.leg_mass).powi(2)
    }

    /// Components of the state that live on the circle (reported so callers
    /// can wrap them for display; integration keeps them unwrapped).
    pub fn angular_components(&self) -> &'static [usize] {
        match self.key {
            SystemKey::UnicycleX => &[2],
            SystemKey::UnicycleY => &[0],
            SystemKey::HopperExact | SystemKey::HopperLinear => &[0, 2],
            _ => &[],
        }
    }

    /// The raw coordinate equations.
    pub fn rhs(&self, x: &[f64], b: &[f64], dx: &mut [f64]) {
        match self.key {
            SystemKey::UnicycleX => {
                dx[0] = b[1] * x[2].sin();
                dx[1] = b[1] * x[2].cos();
                dx[2] = b[0];
            }
            SystemKey::UnicycleY => {
                dx[0] = b[0];
                dx[1] = b[0] * x[2] + b[1];
                dx[2] = -b[0] * x[1];
            }
            SystemKey::Brockett => {
                dx[0] = b[0];
                dx[1] = b[1];
                dx[2] = b[1] * x[0] - b[0] * x[1];
            }
            SystemKey::HopperExact => {
                let u = x[1] + 1.0;
                let g = self.leg_mass * u * u / (1.0 + self.leg_mass * u * u);
                dx[0] = b[0];
                dx[1] = b[1];
                dx[2] = -g * b[0];
            }
            SystemKey::HopperLinear => {
                dx[0] = b[0];
                dx[1] = b[1];
                dx[2] = -(self.k1() + self.k2() * x[1]) * b[0];
            }
            SystemKey::ElasticEuler(eps) => {
                let e = eps as f64;
                dx[0] = -b[0] * x[1] - b[1] * x[2];
                dx[1] = b[0] * x[0] + b[2] * x[2];
                dx[2] = e * (b[1] * x[0] - b[2] * x[1]);
            }
        }
    }

    /// Integrates the raw coordinate ODEs with the adaptive solver; this is
    /// the reference oracle for every Lie-system path.
    pub fn direct_integrate(
        &self,
        controls: &ControlSignal,
        x0: &[f64],
        span: (f64, f64),
        tol: f64,
        grid: &[f64],
    ) -> Result<StateTrajectory, ModelError> {
        self.direct_integrate_with(controls, x0, span, tol, grid, ode::Method::AdaptiveRk45)
    }

    pub fn direct_integrate_with(
        &self,
        controls: &ControlSignal,
        x0: &[f64],
        span: (f64, f64),
        tol: f64,
        grid: &[f64],
        method: ode::Method,
    ) -> Result<StateTrajectory, ModelError> {
        if x0.len() != self.state_dim() {
            return Err(ModelError::BadState {
                expected: self.state_dim(),
                got: x0.len(),
            });
        }
        if controls.dim() != self.control_dim() {
            return Err(ModelError::BadControls {
                expected: self.control_dim(),
                got: controls.dim(),
            });
        }
        let b_cell = std::cell::RefCell::new(vec![0.0; self.control_dim()]);
        let rhs = |t: f64, x: &[f64], dx: &mut [f64]| {
            let mut b = b_cell.borrow_mut();
            controls.eval_into(t, &mut b);
            self.rhs(x, &b, dx);
        };
        let p = IvpProblem {
            method,
            max_step: Some(ode::dense_step_cap(span)),
            ..IvpProblem::new(&rhs, span, x0.to_vec(), tol, grid.to_vec())
        };
        let sol = ode::solve_ivp(&p)?;
        Ok(StateTrajectory {
            times: sol.times,
            states: sol.states,
        })
    }

    /// Packages the algebra key, factorization order, control embedding and
    /// chart for the Wei-Norman path. The exact hopper has no such package.
    pub fn lie_scenario(&self) -> Result<LieScenario, ModelError> {
        let (algebra_key, reconstruction) = match self.key {
            SystemKey::UnicycleX => ("se2", Reconstruction::ViaChart { chart: Chart::UnicycleX }),
            SystemKey::UnicycleY => ("se2", Reconstruction::ViaChart { chart: Chart::UnicycleY }),
            SystemKey::Brockett => ("h3", Reconstruction::ViaChart { chart: Chart::Brockett }),
            SystemKey::HopperLinear => (
                "h3",
                Reconstruction::ViaChart {
                    chart: Chart::Hopper {
                        k1: self.k1(),
                        k2: self.k2(),
                    },
                },
            ),
            SystemKey::ElasticEuler(eps) => {
                let key = match eps {
                    -1 => "geps-1",
                    0 => "geps0",
                    1 => "geps1",
                    _ => return Err(ModelError::MatGroup(MatGroupError::BadEps(eps))),
                };
                (
                    key,
                    Reconstruction::ViaLinearRep {
                        rep_key: key.to_string(),
                    },
                )
            }
            SystemKey::HopperExact => {
                return Err(ModelError::NotALieSystem(self.key.name()));
            }
        };
        Ok(LieScenario {
            algebra_key,
            order: FactorizationOrder::ascending(3),
            reconstruction,
        })
    }

    /// Embeds the model controls into the scenario's algebra (channels beyond
    /// the model's control count are zero).
    pub fn embed_controls(&self, controls: &ControlSignal) -> Result<ControlSignal, ModelError> {
        if controls.dim() != self.control_dim() {
            return Err(ModelError::BadControls {
                expected: self.control_dim(),
                got: controls.dim(),
            });
        }
        Ok(controls.padded_to(3))
    }

    /// Solves the model through the group and maps back to states: the
    /// Wei-Norman counterpart of [`direct_integrate`](Self::direct_integrate).
    pub fn wei_norman_integrate(
        &self,
        controls: &ControlSignal,
        x0: &[f64],
        span: (f64, f64),
        tol: f64,
        grid: &[f64],
    ) -> Result<StateTrajectory, ModelError> {
        let scenario = self.lie_scenario()?;
        let entry = algebra::lookup(scenario.algebra_key).expect("scenario keys are registered");
        let sys = crate::weinorman::WnSystem::new(&entry.constants, scenario.order.clone())?;
        let b = self.embed_controls(controls)?;
        let wn = sys.integrate(&b, span, tol, grid)?;
        Ok(crate::matgroups::reconstruct_state(
            &wn,
            x0,
            &scenario.reconstruction,
        )?)
    }
}

/// A vector field on R^3 given by closures.
pub type Field = std::rc::Rc<dyn Fn(&[f64]) -> Vec<f64>>;

/// Lie bracket of two fields by central differences of their Jacobians:
/// `[X, Y](x) = DY(x)·X(x) - DX(x)·Y(x)`.
pub fn numeric_bracket(x_field: &Field, y_field: &Field, h: f64) -> Field {
    let xf = x_field.clone();
    let yf = y_field.clone();
    std::rc::Rc::new(move |x: &[f64]| {
        let n = x.len();
        let jac = |f: &Field| -> DMatrix<f64> {
            let mut j = DMatrix::zeros(n, n);
            for col in 0..n {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[col] += h;
                xm[col] -= h;
                let fp = f(&xp);
                let fm = f(&xm);
                for row in 0..n {
                    j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
                }
            }
            j
        };
        let jy = jac(&yf);
        let jx = jac(&xf);
        let xv = DVector::from_vec(xf(x));
        let yv = DVector::from_vec(yf(x));
        (jy * xv - jx * yv).as_slice().to_vec()
    })
}

/// Rank history of the span of `{Y1, Y2, [Y2,Y1], [Y2,[Y2,Y1]], ...}`.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// `ranks[d]` is the rank with brackets up to depth `d` included
    /// (`ranks[0]` covers just the input fields).
    pub ranks: Vec<usize>,
}

impl GrowthReport {
    /// True when no bracket past `depth` 1 added a new direction.
    pub fn saturates_at(&self, rank: usize) -> bool {
        self.ranks.iter().skip(1).all(|&r| r == rank)
    }
}

/// Probes whether iterated input brackets keep generating new vector fields.
///
/// Fields are compared as functions: each is sampled at a spread of points
/// around `x` and the singular-value rank of the stacked evaluations is
/// reported per depth. Finite-difference noise from the nested Jacobians
/// caps the useful depth at 5.
pub fn bracket_growth_probe(
    def: &ControlSystemDef,
    depth: usize,
    x: &[f64],
) -> Result<GrowthReport, ModelError> {
    if depth > 5 {
        return Err(ModelError::ProbeDepth(depth));
    }
    if x.len() != 3 {
        return Err(ModelError::BadState {
            expected: 3,
            got: x.len(),
        });
    }
    let def_y1 = def.clone();
    let y1: Field = std::rc::Rc::new(move |x: &[f64]| {
        let mut dx = vec![0.0; 3];
        def_y1.rhs(x, &[1.0, 0.0, 0.0], &mut dx);
        dx
    });
    let def_y2 = def.clone();
    let y2: Field = std::rc::Rc::new(move |x: &[f64]| {
        let mut dx = vec![0.0; 3];
        def_y2.rhs(x, &[0.0, 1.0, 0.0], &mut dx);
        dx
    });

    // sample points spread along every coordinate so fields that differ only
    // as functions (not at a single point) are distinguished
    let samples: Vec<Vec<f64>> = (0..7)
        .map(|k| {
            let s = (k as f64 - 3.0) * 0.1;
            vec![x[0] + 0.3 * s, x[1] + s, x[2] - 0.2 * s]
        })
        .collect();
    // Columns are normalized so the rank threshold compares directions, not
    // sizes — except columns below the nested-finite-difference noise floor,
    // which are genuinely zero brackets and must not be inflated.
    let stack = |fields: &[Field]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(3 * samples.len(), fields.len());
        for (j, f) in fields.iter().enumerate() {
            for (si, pt) in samples.iter().enumerate() {
                let v = f(pt);
                for r in 0..3 {
                    m[(3 * si + r, j)] = v[r];
                }
            }
            let norm = m.column(j).norm();
            if norm > 1e-5 {
                for r in 0..3 * samples.len() {
                    m[(r, j)] /= norm;
                }
            }
        }
        m
    };

    let mut fields = vec![y1.clone(), y2.clone()];
    let mut ranks = vec![linalg::rank(&stack(&fields), 1e-4)];
    let mut last = y1;
    for _ in 0..depth {
        last = numeric_bracket(&y2, &last, 1e-2);
        fields.push(last.clone());
        ranks.push(linalg::rank(&stack(&fields), 1e-4));
    }
    Ok(GrowthReport { ranks })
}

/// The repo's fixed test-control suite for a model: constants, sinusoids at
/// two frequencies, and a polynomial ramp, with amplitudes chosen so every
/// scenario stays inside its chart over `t` in `[0, 5]` (the hopper
/// additionally keeps `|l| <= 0.3`, where its linearization is meaningful).
pub fn standard_test_controls(def: &ControlSystemDef) -> Vec<(String, ControlSignal)> {
    use crate::weinorman::Channel;
    let named = |n: &str, ch: Vec<Channel>| (n.to_string(), ControlSignal::new(ch));
    match def.key {
        SystemKey::UnicycleX | SystemKey::UnicycleY | SystemKey::Brockett => vec![
            named("constants", vec![Channel::Constant(0.7), Channel::Constant(1.0)]),
            named(
                "sinusoids",
                vec![
                    Channel::Sin {
                        amp: 1.0,
                        omega: 1.0,
                        phase: 0.0,
                    },
                    Channel::Cos { amp: 0.8, omega: 2.5 },
                ],
            ),
            named(
                "ramp",
                vec![
                    Channel::Poly(vec![0.2, 0.1]),
                    Channel::Poly(vec![0.5, -0.08]),
                ],
            ),
        ],
        SystemKey::HopperExact | SystemKey::HopperLinear => vec![
            named("constants", vec![Channel::Constant(0.8), Channel::Constant(0.03)]),
            named(
                "sinusoids",
                vec![
                    Channel::Sin {
                        amp: 1.0,
                        omega: 1.0,
                        phase: 0.0,
                    },
                    Channel::Cos {
                        amp: 0.04,
                        omega: 2.5,
                    },
                ],
            ),
            named(
                "ramp",
                vec![
                    Channel::Poly(vec![0.3, 0.1]),
                    Channel::Poly(vec![0.02, 0.004]),
                ],
            ),
        ],
        SystemKey::ElasticEuler(_) => vec![
            named(
                "constants",
                vec![
                    Channel::Constant(0.12),
                    Channel::Constant(0.1),
                    Channel::Constant(-0.08),
                ],
            ),
            named(
                "sinusoids",
                vec![
                    Channel::Sin {
                        amp: 0.12,
                        omega: 1.0,
                        phase: 0.0,
                    },
                    Channel::Cos {
                        amp: 0.1,
                        omega: 2.5,
                    },
                    Channel::Sin {
                        amp: 0.1,
                        omega: 1.0,
                        phase: 0.7,
                    },
                ],
            ),
            named(
                "ramp",
                vec![
                    Channel::Poly(vec![0.05, 0.01]),
                    Channel::Poly(vec![0.0, 0.02]),
                    Channel::Poly(vec![0.04, -0.008]),
                ],
            ),
        ],
    }
}

/// Default initial state used by the bundled scenarios.
pub fn standard_initial_state(key: SystemKey) -> Vec<f64> {
    match key {
        SystemKey::UnicycleX | SystemKey::UnicycleY => vec![0.2, -0.1, 0.3],
        SystemKey::Brockett => vec![0.1, -0.2, 0.05],
        SystemKey::HopperExact | SystemKey::HopperLinear => vec![0.1, 0.05, -0.2],
        SystemKey::ElasticEuler(_) => vec![0.8, -0.3, 0.5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::uniform_grid;
    use approx::assert_relative_eq;

    #[test]
    fn direct_brockett_constant_controls() {
        // z' = x - y is constant along b = (1,1) from x0
        let def = ControlSystemDef::new(SystemKey::Brockett);
        let controls = ControlSignal::constants(&[1.0, 1.0]);
        let x0 = [0.4, -0.3, 0.2];
        let grid = uniform_grid(0.0, 2.0, 21);
        let tr = def
            .direct_integrate(&controls, &x0, (0.0, 2.0), 1e-11, &grid)
            .unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(s[0], 0.4 + t, epsilon = 1e-9);
            assert_relative_eq!(s[1], -0.3 + t, epsilon = 1e-9);
            assert_relative_eq!(s[2], 0.2 + (0.4 - (-0.3)) * t, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_controls_hold_state() {
        for key in SystemKey::all() {
            let def = ControlSystemDef::new(key);
            let controls = ControlSignal::zero(def.control_dim());
            let x0 = standard_initial_state(key);
            let grid = uniform_grid(0.0, 1.0, 6);
            let tr = def
                .direct_integrate(&controls, &x0, (0.0, 1.0), 1e-10, &grid)
                .unwrap();
            for s in &tr.states {
                for (a, b) in s.iter().zip(&x0) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hopper_exact_initial_slope() {
        // at l = 0 the exact system has theta' = -m_l/(1+m_l) b1
        let def = ControlSystemDef::new(SystemKey::HopperExact);
        let mut dx = vec![0.0; 3];
        def.rhs(&[0.0, 0.0, 0.0], &[1.0, 0.0], &mut dx);
        assert_relative_eq!(dx[2], -0.5, epsilon = 1e-15);
        assert_eq!(dx[0], 1.0);
    }

    #[test]
    fn hopper_constants_follow_leg_mass() {
        let def = ControlSystemDef::with_leg_mass(SystemKey::HopperLinear, 3.0);
        assert_relative_eq!(def.k1(), 0.75);
        assert_relative_eq!(def.k2(), 6.0 / 16.0);
    }

    #[test]
    fn lie_scenario_keys() {
        let def = ControlSystemDef::new(SystemKey::UnicycleX);
        let sc = def.lie_scenario().unwrap();
        assert_eq!(sc.algebra_key, "se2");
        assert_eq!(sc.order.indices(), &[0, 1, 2]);

        let def = ControlSystemDef::new(SystemKey::ElasticEuler(0));
        assert_eq!(def.lie_scenario().unwrap().algebra_key, "geps0");

        let def = ControlSystemDef::new(SystemKey::HopperLinear);
        assert_eq!(def.lie_scenario().unwrap().algebra_key, "h3");

        let def = ControlSystemDef::new(SystemKey::HopperExact);
        assert!(matches!(
            def.lie_scenario(),
            Err(ModelError::NotALieSystem(_))
        ));
    }

    #[test]
    fn brockett_reconstruction_matches_hand_solution() {
        let def = ControlSystemDef::new(SystemKey::Brockett);
        let controls = ControlSignal::constants(&[1.0, 1.0]);
        let x0 = [0.7, 0.2, -0.1];
        let grid = uniform_grid(0.0, 3.0, 31);
        let tr = def
            .wei_norman_integrate(&controls, &x0, (0.0, 3.0), 1e-10, &grid)
            .unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(s[0], 0.7 + t, epsilon = 1e-8);
            assert_relative_eq!(s[1], 0.2 + t, epsilon = 1e-8);
            assert_relative_eq!(s[2], -0.1 + 0.5 * t, epsilon = 1e-7);
        }
    }

    #[test]
    fn unicycle_pure_drive_reconstruction() {
        // b1 = 0, b2 = 1 drives straight along the heading
        let def = ControlSystemDef::new(SystemKey::UnicycleX);
        let controls = ControlSignal::constants(&[0.0, 1.0]);
        let x0 = [0.5, -0.4, 0.9];
        let grid = uniform_grid(0.0, 2.0, 21);
        let tr = def
            .wei_norman_integrate(&controls, &x0, (0.0, 2.0), 1e-10, &grid)
            .unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(s[0], 0.5 + t * 0.9f64.sin(), epsilon = 1e-8);
            assert_relative_eq!(s[1], -0.4 + t * 0.9f64.cos(), epsilon = 1e-8);
            assert_relative_eq!(s[2], 0.9, epsilon = 1e-9);
        }
    }

    #[test]
    fn probe_detects_non_lie_structure() {
        let def = ControlSystemDef::new(SystemKey::HopperExact);
        let report = bracket_growth_probe(&def, 3, &[0.0, 0.1, 0.0]).unwrap();
        assert_eq!(report.ranks[0], 2);
        assert_eq!(report.ranks[1], 3);
        assert_eq!(report.ranks[2], 4);
        assert_eq!(report.ranks[3], 5);
    }

    #[test]
    fn probe_saturates_on_linearized_hopper() {
        let def = ControlSystemDef::new(SystemKey::HopperLinear);
        let report = bracket_growth_probe(&def, 3, &[0.0, 0.1, 0.0]).unwrap();
        assert_eq!(report.ranks, vec![2, 3, 3, 3]);
        assert!(report.saturates_at(3));
    }

    #[test]
    fn field_bracketed_with_itself_vanishes() {
        let def = ControlSystemDef::new(SystemKey::HopperExact);
        let d2 = def.clone();
        let y2: Field = std::rc::Rc::new(move |x: &[f64]| {
            let mut dx = vec![0.0; 3];
            d2.rhs(x, &[0.0, 1.0], &mut dx);
            dx
        });
        let z = numeric_bracket(&y2, &y2, 1e-2);
        let v = z(&[0.3, 0.1, -0.2]);
        assert!(v.iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn probe_depth_is_capped() {
        let def = ControlSystemDef::new(SystemKey::HopperExact);
        assert!(matches!(
            bracket_growth_probe(&def, 6, &[0.0, 0.1, 0.0]),
            Err(ModelError::ProbeDepth(6))
        ));
    }
}
