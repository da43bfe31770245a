//! Solvers for Lie systems: ODE systems whose time-dependent vector field is
//! a time-varying combination of vector fields closing on a finite-dimensional
//! real Lie algebra.
//!
//! The crate is organized around the pipeline
//!
//! 1. [`algebra`]: structure constants, brackets, adjoint matrices,
//!    solvability, bracket-generated closures, and a registry of the
//!    algebras used by the bundled models;
//! 2. [`weinorman`]: the generic engine deriving and integrating the
//!    product-of-exponentials equations `M(v) v̇ = b(t)` for any algebra
//!    and factorization order;
//! 3. [`matgroups`]: concrete parametrized groups (SE(2), H(3), the
//!    signature family), their composition laws, homogeneous-space actions,
//!    and matrix representations used to map solved group curves back to
//!    state trajectories;
//! 4. [`models`]: the bundled systems (quadratic Hamiltonians, the
//!    time-dependent linear potential with its closed forms, and four
//!    control-theory examples), each exposed both as a raw ODE and as a
//!    Lie-system scenario so the two solution paths can be cross-checked;
//! 5. [`control`]: controllability verdicts and subgroup reduction.
//!
//! [`ode`] provides the numerical backbone (adaptive Runge-Kutta and nested
//! quadrature) that everything else builds on.

pub mod algebra;
pub mod control;
pub mod linalg;
pub mod matgroups;
pub mod models;
pub mod ode;
pub mod weinorman;

pub use algebra::{ConsistencyReport, StructureConstants};
pub use matgroups::{Chart, EpsTrig, GroupElement, MatrixRep, StateTrajectory};
pub use ode::{IvpProblem, Solution};
pub use weinorman::{ControlSignal, FactorizationOrder, WeiNormanTrajectory};
