//! Controllability of drift-free right-invariant systems and reduction of a
//! group-level Lie system to a subgroup problem given a particular solution
//! on the quotient space.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{AlgebraError, StructureConstants};
use crate::matgroups::{compose, Group, GroupElement, MatGroupError};
use crate::ode::{self, IvpProblem, OdeError};
use crate::weinorman::{Channel, WnError};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("lift breakdown at t = {t}: 1 + eps (z1² + z2²) = {value:e} is not positive")]
    LiftBreakdown { t: f64, value: f64 },
    #[error("generator index {index} out of range for dimension {dim}")]
    BadGenerator { index: usize, dim: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    MatGroup(#[from] MatGroupError),
    #[error(transparent)]
    Wn(#[from] WnError),
}

/// Outcome of the bracket-generation test: the system is controllable
/// exactly when the inputs generate the whole algebra.
#[derive(Debug, Clone)]
pub struct ControllabilityVerdict {
    pub generated_dim: usize,
    pub full_dim: usize,
    pub controllable: bool,
    pub generated_basis: Vec<DVector<f64>>,
}

impl std::fmt::Display for ControllabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (generated {} of {})",
            if self.controllable {
                "controllable"
            } else {
                "not controllable"
            },
            self.generated_dim,
            self.full_dim
        )
    }
}

/// Controllability verdict for input generators given as algebra elements.
pub fn controllability(
    sc: &StructureConstants,
    generators: &[DVector<f64>],
) -> Result<ControllabilityVerdict, ControlError> {
    let basis = sc.generated_subalgebra(generators)?;
    Ok(ControllabilityVerdict {
        generated_dim: basis.len(),
        full_dim: sc.dim(),
        controllable: basis.len() == sc.dim(),
        generated_basis: basis,
    })
}

/// Controllability verdict for input generators given as basis indices.
pub fn controllability_by_indices(
    sc: &StructureConstants,
    indices: &[usize],
) -> Result<ControllabilityVerdict, ControlError> {
    let gens: Vec<DVector<f64>> = indices
        .iter()
        .map(|&i| {
            if i >= sc.dim() {
                Err(ControlError::BadGenerator {
                    index: i,
                    dim: sc.dim(),
                })
            } else {
                Ok(sc.basis_element(i))
            }
        })
        .collect::<Result<_, _>>()?;
    controllability(sc, &gens)
}

/// Output of a subgroup reduction: the particular solution on the quotient,
/// the scalar subgroup coordinate, and the reconstructed full group curve.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub times: Vec<f64>,
    /// `z(t)` on the homogeneous space
    pub homogeneous: Vec<[f64; 2]>,
    /// the subgroup coordinate (`b(t)` or `v(t)`)
    pub subgroup: Vec<f64>,
    /// `g(t) = g1(t) h(t)` in the group's own coordinates
    pub curve: Vec<GroupElement>,
}

/// Internal fine grid: dense output at nodes and midpoints of a refinement of
/// the requested grid, so the subgroup equation integrates by composite
/// Simpson without interpolating.
struct FineGrid {
    points: Vec<f64>,
    refine: usize,
}

impl FineGrid {
    fn new(span: (f64, f64), grid: &[f64]) -> Self {
        let out_panels = grid.len() - 1;
        let refine = 2048_usize.div_ceil(out_panels);
        let panels = out_panels * refine;
        FineGrid {
            points: ode::uniform_grid(span.0, span.1, 2 * panels + 1),
            refine,
        }
    }

    fn panels(&self) -> usize {
        (self.points.len() - 1) / 2
    }

    fn h(&self) -> f64 {
        self.points[2] - self.points[0]
    }

    /// Index into the fine nodes for output sample `i`.
    fn out_index(&self, i: usize) -> usize {
        2 * self.refine * i
    }

    /// Cumulative integral of samples given at all fine points (nodes and
    /// midpoints), returned at the fine nodes.
    fn simpson_cumulative(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.panels() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        let h = self.h();
        for k in 0..self.panels() {
            acc += h / 6.0 * (values[2 * k] + 4.0 * values[2 * k + 1] + values[2 * k + 2]);
            out.push(acc);
        }
        out
    }
}

/// Reduction of the planar Euclidean group problem with inputs `(b1, b2)`:
/// integrates the quotient equations `ż1 = -b1`, `ż2 = -b2 cos z1`, lifts the
/// particular solution as `g1 = (z1, z2, 0)`, solves the remaining scalar
/// equation `ḃ = b2 sin z1` by quadrature, and composes `g = g1 h`.
pub fn reduce_se2(
    b1: &Channel,
    b2: &Channel,
    span: (f64, f64),
    tol: f64,
    grid: &[f64],
) -> Result<ReductionOutput, ControlError> {
    let fine = FineGrid::new(span, grid);
    let rhs = |t: f64, z: &[f64], dz: &mut [f64]| {
        dz[0] = -b1.eval(t);
        dz[1] = -b2.eval(t) * z[0].cos();
    };
    let p = IvpProblem::new(&rhs, span, vec![0.0, 0.0], tol, fine.points.clone())
        .with_max_step(ode::dense_step_cap(span));
    let sol = ode::solve_ivp(&p)?;

    let integrand: Vec<f64> = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(t, z)| b2.eval(*t) * z[0].sin())
        .collect();
    let subgroup_fine = fine.simpson_cumulative(&integrand);

    let mut times = Vec::with_capacity(grid.len());
    let mut homogeneous = Vec::with_capacity(grid.len());
    let mut subgroup = Vec::with_capacity(grid.len());
    let mut curve = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let fi = fine.out_index(i);
        let z = &sol.states[fi];
        let b = subgroup_fine[fi / 2];
        let g1 = GroupElement::new(Group::Se2, &[z[0], z[1], 0.0])?;
        let h = GroupElement::new(Group::Se2, &[0.0, 0.0, b])?;
        times.push(sol.times[fi]);
        homogeneous.push([z[0], z[1]]);
        subgroup.push(b);
        curve.push(compose(&g1, &h)?);
    }
    Ok(ReductionOutput {
        times,
        homogeneous,
        subgroup,
        curve,
    })
}

/// Reduction of the four-parameter covering-group problem with inputs
/// `(b1, b2, b3)`: integrates the Riccati-like quotient pair, lifts through
/// `g1 = (1, 0, z1, z2)/sqrt(1 + eps (z1² + z2²))`, solves
/// `v̇ = -b1 + eps (b3 z1 - b2 z2)` by quadrature, and composes with
/// `h = (cos(v/2), sin(v/2), 0, 0)`. Starts from the projection of the
/// identity, `z(0) = (0, 0)`.
pub fn reduce_gbar(
    eps: i8,
    b1: &Channel,
    b2: &Channel,
    b3: &Channel,
    span: (f64, f64),
    tol: f64,
    grid: &[f64],
) -> Result<ReductionOutput, ControlError> {
    reduce_gbar_from(eps, b1, b2, b3, [0.0, 0.0], span, tol, grid)
}

/// [`reduce_gbar`] from an arbitrary quotient-space start (the lift
/// denominator `1 + eps (z1² + z2²)` can reach zero for `eps = -1` when the
/// particular solution leaves the unit disc).
#[allow(clippy::too_many_arguments)]
pub fn reduce_gbar_from(
    eps: i8,
    b1: &Channel,
    b2: &Channel,
    b3: &Channel,
    z0: [f64; 2],
    span: (f64, f64),
    tol: f64,
    grid: &[f64],
) -> Result<ReductionOutput, ControlError> {
    if !(-1..=1).contains(&eps) {
        return Err(ControlError::MatGroup(MatGroupError::BadEps(eps)));
    }
    let e = eps as f64;
    let fine = FineGrid::new(span, grid);
    let rhs = |t: f64, z: &[f64], dz: &mut [f64]| {
        let (z1, z2) = (z[0], z[1]);
        let (c1, c2, c3) = (b1.eval(t), b2.eval(t), b3.eval(t));
        dz[0] = c1 * z2 - 0.5 * c2 * (1.0 + e * (z1 * z1 - z2 * z2)) - c3 * e * z1 * z2;
        dz[1] = -c1 * z1 - c2 * e * z1 * z2 - 0.5 * c3 * (1.0 - e * (z1 * z1 - z2 * z2));
    };
    let p = IvpProblem::new(&rhs, span, vec![z0[0], z0[1]], tol, fine.points.clone())
        .with_max_step(ode::dense_step_cap(span));
    let sol = ode::solve_ivp(&p)?;

    let integrand: Vec<f64> = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(t, z)| -b1.eval(*t) + e * (b3.eval(*t) * z[0] - b2.eval(*t) * z[1]))
        .collect();
    let subgroup_fine = fine.simpson_cumulative(&integrand);

    let mut times = Vec::with_capacity(grid.len());
    let mut homogeneous = Vec::with_capacity(grid.len());
    let mut subgroup = Vec::with_capacity(grid.len());
    let mut curve = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let fi = fine.out_index(i);
        let t = sol.times[fi];
        let z = &sol.states[fi];
        let v = subgroup_fine[fi / 2];
        let lift = 1.0 + e * (z[0] * z[0] + z[1] * z[1]);
        if lift <= 0.0 {
            return Err(ControlError::LiftBreakdown { t, value: lift });
        }
        let s = lift.sqrt();
        let g1 = GroupElement::new(Group::GBar(eps), &[1.0 / s, 0.0, z[0] / s, z[1] / s])?;
        let h = GroupElement::new(
            Group::GBar(eps),
            &[(v / 2.0).cos(), (v / 2.0).sin(), 0.0, 0.0],
        )?;
        times.push(t);
        homogeneous.push([z[0], z[1]]);
        subgroup.push(v);
        curve.push(compose(&g1, &h)?);
    }
    Ok(ReductionOutput {
        times,
        homogeneous,
        subgroup,
        curve,
    })
}

/// Projection `tau` onto the homogeneous space, as used by each reduction.
pub fn project(g: &GroupElement) -> Result<[f64; 2], ControlError> {
    match g.group {
        Group::Se2 => Ok([g.coords[0], g.coords[1]]),
        Group::GBar(_) => {
            let (a, b, c, d) = (g.coords[0], g.coords[1], g.coords[2], g.coords[3]);
            let n = a * a + b * b;
            Ok([(a * c - b * d) / n, (b * c + a * d) / n])
        }
        _ => Err(ControlError::MatGroup(MatGroupError::GroupMismatch {
            expected: "se2 or gbar".into(),
            got: g.group.name(),
        })),
    }
}

/// The catalogued fundamental vector fields on the two homogeneous spaces,
/// with hand-coded analytic Jacobians so brackets need no finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneousCase {
    Se2,
    Gbar(i8),
}

type Field2 = (fn(f64, f64, f64) -> [f64; 2], fn(f64, f64, f64) -> [[f64; 2]; 2]);

fn fields(case: HomogeneousCase) -> (f64, [Field2; 3]) {
    match case {
        HomogeneousCase::Se2 => (
            0.0,
            [
                (|_e, _z1, _z2| [-1.0, 0.0], |_e, _z1, _z2| [[0.0, 0.0], [0.0, 0.0]]),
                (
                    |_e, z1, _z2| [0.0, -z1.cos()],
                    |_e, z1, _z2| [[0.0, 0.0], [z1.sin(), 0.0]],
                ),
                (
                    |_e, z1, _z2| [0.0, -z1.sin()],
                    |_e, z1, _z2| [[0.0, 0.0], [-z1.cos(), 0.0]],
                ),
            ],
        ),
        HomogeneousCase::Gbar(eps) => (
            eps as f64,
            [
                (|_e, z1, z2| [z2, -z1], |_e, _z1, _z2| [[0.0, 1.0], [-1.0, 0.0]]),
                (
                    |e, z1, z2| [-0.5 * (1.0 + e * (z1 * z1 - z2 * z2)), -e * z1 * z2],
                    |e, z1, z2| [[-e * z1, e * z2], [-e * z2, -e * z1]],
                ),
                (
                    |e, z1, z2| [-e * z1 * z2, -0.5 * (1.0 - e * (z1 * z1 - z2 * z2))],
                    |e, z1, z2| [[-e * z2, -e * z1], [e * z1, -e * z2]],
                ),
            ],
        ),
    }
}

fn bracket_at(e: f64, x: &Field2, y: &Field2, z1: f64, z2: f64) -> [f64; 2] {
    let xv = (x.0)(e, z1, z2);
    let yv = (y.0)(e, z1, z2);
    let jx = (x.1)(e, z1, z2);
    let jy = (y.1)(e, z1, z2);
    [
        jy[0][0] * xv[0] + jy[0][1] * xv[1] - (jx[0][0] * yv[0] + jx[0][1] * yv[1]),
        jy[1][0] * xv[0] + jy[1][1] * xv[1] - (jx[1][0] * yv[0] + jx[1][1] * yv[1]),
    ]
}

/// One checked commutator of homogeneous-space fields.
#[derive(Debug, Clone)]
pub struct FieldCheck {
    pub left: usize,
    pub right: usize,
    pub description: String,
    pub residual: f64,
}

/// Verifies the commutation table of the homogeneous-space fields
/// (`[X1,X2] = X3`, `[X2,X3] = eps X1` or `0`, `[X1,X3] = -X2`) pointwise at
/// the given sample points. Residuals are exact up to rounding because the
/// Jacobians are analytic.
pub fn verify_fundamental_fields(
    case: HomogeneousCase,
    points: &[[f64; 2]],
) -> Vec<FieldCheck> {
    let (e, f) = fields(case);
    // expected [Xi, Xj] as a combination of the fields: coefficient table
    let table: [(usize, usize, [f64; 3], &str); 3] = match case {
        HomogeneousCase::Se2 => [
            (0, 1, [0.0, 0.0, 1.0], "[X1,X2] = X3"),
            (1, 2, [0.0, 0.0, 0.0], "[X2,X3] = 0"),
            (0, 2, [0.0, -1.0, 0.0], "[X1,X3] = -X2"),
        ],
        HomogeneousCase::Gbar(_) => [
            (0, 1, [0.0, 0.0, 1.0], "[X1,X2] = X3"),
            (1, 2, [e, 0.0, 0.0], "[X2,X3] = eps X1"),
            (0, 2, [0.0, -1.0, 0.0], "[X1,X3] = -X2"),
        ],
    };
    let mut checks = Vec::new();
    for (i, j, coeffs, desc) in table {
        let mut worst: f64 = 0.0;
        for &[z1, z2] in points {
            let got = bracket_at(e, &f[i], &f[j], z1, z2);
            let mut expect = [0.0, 0.0];
            for (k, c) in coeffs.iter().enumerate() {
                let fv = (f[k].0)(e, z1, z2);
                expect[0] += c * fv[0];
                expect[1] += c * fv[1];
            }
            worst = worst
                .max((got[0] - expect[0]).abs())
                .max((got[1] - expect[1]).abs());
        }
        checks.push(FieldCheck {
            left: i,
            right: j,
            description: desc.to_string(),
            residual: worst,
        });
    }
    // a field bracketed with itself vanishes identically
    let mut worst: f64 = 0.0;
    for &[z1, z2] in points {
        let got = bracket_at(e, &f[1], &f[1], z1, z2);
        worst = worst.max(got[0].abs()).max(got[1].abs());
    }
    checks.push(FieldCheck {
        left: 1,
        right: 1,
        description: "[X2,X2] = 0".to_string(),
        residual: worst,
    });
    checks
}

/// Matrix form of the reduced curve samples in the group's faithful
/// representation, for parametrization-independent comparisons.
pub fn curve_matrices(out: &ReductionOutput) -> Vec<DMatrix<f64>> {
    out.curve.iter().map(|g| g.to_matrix()).collect()
}
