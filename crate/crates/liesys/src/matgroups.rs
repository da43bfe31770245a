//! Concrete matrix groups behind the bundled models: faithful matrix
//! representations, parametrized composition laws, homogeneous-space actions,
//! and the signature-dependent trigonometric functions. This is the layer
//! that turns a solved group curve into solution curves of the original
//! system.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::weinorman::WeiNormanTrajectory;

#[derive(Debug, Error)]
pub enum MatGroupError {
    #[error("group mismatch: expected {expected}, got {got}")]
    GroupMismatch { expected: String, got: String },
    #[error("coordinate vector has length {got}, group needs {expected}")]
    BadCoords { expected: usize, got: usize },
    #[error("state vector has length {got}, chart needs {expected}")]
    BadState { expected: usize, got: usize },
    #[error("chart expects a {expected} element, got {got}")]
    ChartGroup { expected: String, got: String },
    #[error("chart breakdown{at}: {detail}", at = t.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    ChartBreakdown { t: Option<f64>, detail: String },
    #[error("T_eps pole: C_eps({x}) = 0")]
    Pole { x: f64 },
    #[error("eps must be -1, 0 or 1, got {0}")]
    BadEps(i8),
    #[error("unknown representation key `{0}`")]
    UnknownRep(String),
    #[error("group constraint violated: residual {residual:e}")]
    ConstraintViolated { residual: f64 },
    #[error("trajectory algebra `{got}` does not drive this chart (expected {expected})")]
    WrongAlgebra { expected: String, got: String },
    #[error("representation has {rep} generators, trajectory dimension is {wn}")]
    RepMismatch { rep: usize, wn: usize },
}

/// Signature-dependent trigonometric functions `C_eps`, `S_eps`, `T_eps`:
/// cos/sin for `eps = 1`, the degenerate pair `1`/`x` for `eps = 0`, and
/// cosh/sinh for `eps = -1`. They satisfy `C² + eps S² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsTrig {
    eps: i8,
}

impl EpsTrig {
    pub fn new(eps: i8) -> Result<Self, MatGroupError> {
        if !(-1..=1).contains(&eps) {
            return Err(MatGroupError::BadEps(eps));
        }
        Ok(EpsTrig { eps })
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    pub fn c(&self, x: f64) -> f64 {
        match self.eps {
            1 => x.cos(),
            0 => 1.0,
            _ => x.cosh(),
        }
    }

    pub fn s(&self, x: f64) -> f64 {
        match self.eps {
            1 => x.sin(),
            0 => x,
            _ => x.sinh(),
        }
    }

    /// `T = S / C`; a pole where `C_eps(x)` vanishes (only possible for
    /// `eps = 1` at odd multiples of pi/2).
    pub fn t(&self, x: f64) -> Result<f64, MatGroupError> {
        let c = self.c(x);
        if c.abs() < 1e-14 {
            return Err(MatGroupError::Pole { x });
        }
        Ok(self.s(x) / c)
    }

    /// `(C_eps(x), S_eps(x), T_eps(x))`.
    pub fn all(&self, x: f64) -> Result<(f64, f64, f64), MatGroupError> {
        Ok((self.c(x), self.s(x), self.t(x)?))
    }
}

/// The parametrized groups with explicit composition laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Planar Euclidean group in coordinates `(theta, a, b)` from the
    /// factorization `g = exp(theta a1) exp(a a2) exp(b a3)`.
    Se2,
    /// Heisenberg-Weyl group in coordinates `(a, b, c)` from
    /// `g = exp(a a1) exp(b a2) exp(c a3)`.
    H3,
    /// Heisenberg-Weyl group parametrized by the entries of the
    /// upper-triangular unipotent matrix `[[1, a, c], [0, 1, b], [0, 0, 1]]`.
    H3Upper,
    /// Four-parameter group `(a, b, c, d)` with `a² + b² + eps (c² + d²) = 1`
    /// covering the signature family.
    GBar(i8),
}

impl Group {
    pub fn coord_count(&self) -> usize {
        match self {
            Group::GBar(_) => 4,
            _ => 3,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Group::Se2 => "se2".into(),
            Group::H3 => "h3".into(),
            Group::H3Upper => "h3-upper".into(),
            Group::GBar(e) => format!("gbar({e})"),
        }
    }
}

/// A point of a concrete parametrized group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub group: Group,
    pub coords: DVector<f64>,
}

impl GroupElement {
    pub fn new(group: Group, coords: &[f64]) -> Result<Self, MatGroupError> {
        if coords.len() != group.coord_count() {
            return Err(MatGroupError::BadCoords {
                expected: group.coord_count(),
                got: coords.len(),
            });
        }
        let g = GroupElement {
            group,
            coords: DVector::from_column_slice(coords),
        };
        if let Group::GBar(_) = group {
            let res = g.constraint_residual();
            if res > 1e-9 {
                return Err(MatGroupError::ConstraintViolated { residual: res });
            }
        }
        Ok(g)
    }

    pub fn identity(group: Group) -> Self {
        let mut coords = DVector::zeros(group.coord_count());
        if let Group::GBar(_) = group {
            coords[0] = 1.0;
        }
        GroupElement { group, coords }
    }

    /// `|a² + b² + eps (c² + d²) - 1|` for the four-parameter groups, zero
    /// otherwise.
    pub fn constraint_residual(&self) -> f64 {
        match self.group {
            Group::GBar(eps) => {
                let c = &self.coords;
                (c[0] * c[0] + c[1] * c[1] + eps as f64 * (c[2] * c[2] + c[3] * c[3]) - 1.0).abs()
            }
            _ => 0.0,
        }
    }

    /// One-parameter subgroup `exp(s a_axis)` in this group's coordinates.
    pub fn exp_basis(group: Group, axis: usize, s: f64) -> Result<Self, MatGroupError> {
        let dim = 3;
        if axis >= dim {
            return Err(MatGroupError::BadCoords {
                expected: dim,
                got: axis + 1,
            });
        }
        let coords: Vec<f64> = match group {
            Group::Se2 | Group::H3 => {
                let mut c = vec![0.0; 3];
                c[axis] = s;
                c
            }
            // the generators of the matrix parametrization carry a sign:
            // exp(s a1) = [[1, -s, 0], [0, 1, 0], [0, 0, 1]] etc.
            Group::H3Upper => {
                let mut c = vec![0.0; 3];
                c[axis] = -s;
                c
            }
            Group::GBar(eps) => {
                let tr = EpsTrig::new(eps)?;
                let half = 0.5 * s;
                match axis {
                    0 => vec![(half).cos(), (half).sin(), 0.0, 0.0],
                    1 => vec![tr.c(half), 0.0, tr.s(half), 0.0],
                    _ => vec![tr.c(half), 0.0, 0.0, tr.s(half)],
                }
            }
        };
        Ok(GroupElement {
            group,
            coords: DVector::from_column_slice(&coords),
        })
    }

    /// Faithful matrix form of the element, used for
    /// parametrization-independent comparisons of group curves.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let c = &self.coords;
        match self.group {
            Group::Se2 => {
                let rep = rep("se2").expect("bundled rep");
                rep.exp_generator(-c[0], 0)
                    * rep.exp_generator(-c[1], 1)
                    * rep.exp_generator(-c[2], 2)
            }
            Group::H3 => {
                let rep = rep("h3").expect("bundled rep");
                rep.exp_generator(-c[0], 0)
                    * rep.exp_generator(-c[1], 1)
                    * rep.exp_generator(-c[2], 2)
            }
            Group::H3Upper => DMatrix::from_row_slice(
                3,
                3,
                &[1.0, c[0], c[2], 0.0, 1.0, c[1], 0.0, 0.0, 1.0],
            ),
            Group::GBar(eps) => {
                let e = eps as f64;
                let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        a, -b, -e * cc, -e * d, //
                        b, a, -e * d, e * cc, //
                        cc, d, a, -b, //
                        d, -cc, b, a,
                    ],
                )
            }
        }
    }
}

/// Composition `g · h` by the group's explicit law.
pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement, MatGroupError> {
    if g.group != h.group {
        return Err(MatGroupError::GroupMismatch {
            expected: g.group.name(),
            got: h.group.name(),
        });
    }
    let x = &g.coords;
    let y = &h.coords;
    let coords = match g.group {
        Group::Se2 => {
            let (theta, a, b) = (x[0], x[1], x[2]);
            let (tp, ap, bp) = (y[0], y[1], y[2]);
            vec![
                theta + tp,
                ap + a * tp.cos() + b * tp.sin(),
                bp - a * tp.sin() + b * tp.cos(),
            ]
        }
        Group::H3 => vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] - x[1] * y[0]],
        Group::H3Upper => vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]],
        Group::GBar(eps) => {
            let e = eps as f64;
            let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
            let (ap, bp, cp, dp) = (y[0], y[1], y[2], y[3]);
            vec![
                a * ap - b * bp - e * (c * cp + d * dp),
                b * ap + a * bp - e * (d * cp - c * dp),
                c * ap + d * bp + a * cp - b * dp,
                d * ap - c * bp + b * cp + a * dp,
            ]
        }
    };
    Ok(GroupElement {
        group: g.group,
        coords: DVector::from_column_slice(&coords),
    })
}

/// Homogeneous-space charts with explicit action formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// Unicycle configuration `(x1, x2, x3)` under SE(2).
    UnicycleX,
    /// The alternative unicycle coordinates `(y1, y2, y3)` straightening the
    /// two commuting input fields.
    UnicycleY,
    /// Brockett integrator state `(x, y, z)` under H(3).
    Brockett,
    /// Hopping-robot state `(psi, l, theta)` under H(3), with the leg-mass
    /// constants baked into the action.
    Hopper { k1: f64, k2: f64 },
    /// The two-dimensional homogeneous space of the four-parameter group.
    GbarHomogeneous { eps: i8 },
    /// Phase-plane `(q, p)` under the upper-triangular H(3) parametrization.
    AffinePlane,
}

impl Chart {
    fn expected_group(&self) -> Group {
        match self {
            Chart::UnicycleX | Chart::UnicycleY => Group::Se2,
            Chart::Brockett | Chart::Hopper { .. } => Group::H3,
            Chart::GbarHomogeneous { eps } => Group::GBar(*eps),
            Chart::AffinePlane => Group::H3Upper,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Chart::GbarHomogeneous { .. } | Chart::AffinePlane => 2,
            _ => 3,
        }
    }
}

/// Left action `Φ(g, x)` of the chart's group on the chart's state space.
pub fn act(g: &GroupElement, x: &[f64], chart: &Chart) -> Result<Vec<f64>, MatGroupError> {
    let expected = chart.expected_group();
    if g.group != expected {
        return Err(MatGroupError::ChartGroup {
            expected: expected.name(),
            got: g.group.name(),
        });
    }
    if x.len() != chart.state_dim() {
        return Err(MatGroupError::BadState {
            expected: chart.state_dim(),
            got: x.len(),
        });
    }
    let c = &g.coords;
    Ok(match chart {
        Chart::UnicycleX => {
            let (theta, a, b) = (c[0], c[1], c[2]);
            vec![
                x[0] - b * x[2].cos() - a * x[2].sin(),
                x[1] + b * x[2].sin() - a * x[2].cos(),
                x[2] - theta,
            ]
        }
        Chart::UnicycleY => {
            let (theta, a, b) = (c[0], c[1], c[2]);
            let (ct, st) = (theta.cos(), theta.sin());
            vec![
                x[0] - theta,
                x[1] * ct - x[2] * st - a * ct + b * st,
                x[1] * st + x[2] * ct - a * st - b * ct,
            ]
        }
        Chart::Brockett => {
            let (a, b, cc) = (c[0], c[1], c[2]);
            vec![
                x[0] - a,
                x[1] - b,
                x[2] + a * x[1] - b * x[0] - a * b - 2.0 * cc,
            ]
        }
        Chart::Hopper { k1, k2 } => {
            let (a, b, cc) = (c[0], c[1], c[2]);
            vec![
                x[0] - a,
                x[1] - b,
                x[2] + k2 * (a * x[1] - cc - a * b) + a * k1,
            ]
        }
        Chart::GbarHomogeneous { eps } => {
            let e = *eps as f64;
            let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
            let (z1, z2) = (x[0], x[1]);
            let r2 = z1 * z1 + z2 * z2;
            let n1 = (a * a - b * b - e * (cc * cc - d * d)) * z1
                - 2.0 * (a * b + e * cc * d) * z2
                + (a * cc - b * d) * (1.0 - e * r2);
            let n2 = 2.0 * (a * b - e * cc * d) * z1
                + (a * a - b * b + e * (cc * cc - d * d)) * z2
                + (a * d + b * cc) * (1.0 - e * r2);
            let den = a * a + b * b - 2.0 * e * ((a * cc + b * d) * z1 + (a * d - b * cc) * z2)
                + e * e * (cc * cc + d * d) * r2;
            if den <= 1e-14 {
                return Err(MatGroupError::ChartBreakdown {
                    t: None,
                    detail: format!("action denominator D = {den:e}"),
                });
            }
            vec![n1 / den, n2 / den]
        }
        Chart::AffinePlane => {
            let (a1, a2, a3) = (c[0], c[1], c[2]);
            vec![x[0] + a1 * x[1] + a3, x[1] + a2]
        }
    })
}

/// Signature-dependent trig values `(C_eps(x), S_eps(x), T_eps(x))`.
pub fn eps_trig(eps: i8, x: f64) -> Result<(f64, f64, f64), MatGroupError> {
    EpsTrig::new(eps)?.all(x)
}

/// Finite-dimensional representation of one of the registry algebras:
/// generator matrices `rho(a_alpha)` satisfying
/// `rho([a,b]) = rho(a) rho(b) - rho(b) rho(a)`.
#[derive(Debug, Clone)]
pub struct MatrixRep {
    algebra_key: String,
    generators: Vec<DMatrix<f64>>,
    size: usize,
}

impl MatrixRep {
    pub fn new(algebra_key: impl Into<String>, generators: Vec<DMatrix<f64>>) -> Self {
        let size = generators.first().map_or(0, |g| g.nrows());
        for g in &generators {
            assert!(g.is_square() && g.nrows() == size, "generators must be square, same size");
        }
        MatrixRep {
            algebra_key: algebra_key.into(),
            generators,
            size,
        }
    }

    pub fn algebra_key(&self) -> &str {
        &self.algebra_key
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, alpha: usize) -> &DMatrix<f64> {
        &self.generators[alpha]
    }

    /// `exp(-v rho(a_alpha))`, exact for nilpotent generators.
    pub fn exp_generator(&self, v: f64, alpha: usize) -> DMatrix<f64> {
        linalg::expm(&(-v * &self.generators[alpha]))
    }

    /// `Π_k exp(-v[o_k] rho(a_{o_k}))` over the order, left to right.
    pub fn product_of_exponentials(&self, order: &[usize], v: &DVector<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::identity(self.size, self.size);
        for &alpha in order {
            g *= self.exp_generator(v[alpha], alpha);
        }
        g
    }

    /// Worst-case `|rho([a_α, a_β]) - [rho(a_α), rho(a_β)]|` over all pairs.
    pub fn homomorphism_residual(&self, sc: &crate::algebra::StructureConstants) -> f64 {
        let r = self.generators.len();
        let mut worst: f64 = 0.0;
        for alpha in 0..r {
            for beta in 0..r {
                let mut lhs = DMatrix::zeros(self.size, self.size);
                for gamma in 0..r {
                    lhs += sc.c(gamma, alpha, beta) * &self.generators[gamma];
                }
                let rhs = &self.generators[alpha] * &self.generators[beta]
                    - &self.generators[beta] * &self.generators[alpha];
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }
}

fn e(n: usize, i: usize, j: usize, v: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = v;
    m
}

fn build_reps() -> Vec<MatrixRep> {
    let mut reps = Vec::new();

    // Heisenberg-Weyl as unipotent upper-triangular 3x3 matrices
    reps.push(MatrixRep::new(
        "h3",
        vec![e(3, 0, 1, 1.0), e(3, 1, 2, 1.0), e(3, 0, 2, 1.0)],
    ));
    // the [a1,a2] = -a3 sign convention flips all generators
    reps.push(MatrixRep::new(
        "h3-classical",
        vec![e(3, 0, 1, -1.0), e(3, 1, 2, -1.0), e(3, 0, 2, -1.0)],
    ));

    // SE(2) acting on homogeneous planar coordinates
    let j = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    reps.push(MatrixRep::new(
        "se2",
        vec![j, e(3, 0, 2, 1.0), e(3, 1, 2, 1.0)],
    ));

    // affine group of the quadratic Hamiltonian: sl(2) block plus translations
    let g5_sl2 = [
        DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[-0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    ];
    reps.push(MatrixRep::new(
        "g5",
        vec![
            g5_sl2[0].clone(),
            g5_sl2[1].clone(),
            g5_sl2[2].clone(),
            e(3, 0, 2, 1.0),
            e(3, 1, 2, 1.0),
        ],
    ));

    // the six-dimensional extension: paired translations with a central charge
    let pad = |m: &DMatrix<f64>| {
        let mut z = DMatrix::zeros(4, 4);
        z.view_mut((0, 0), (2, 2)).copy_from(&m.view((0, 0), (2, 2)));
        z
    };
    let mut a4 = DMatrix::zeros(4, 4);
    a4[(0, 2)] = 1.0;
    a4[(3, 1)] = 0.5;
    let mut a5 = DMatrix::zeros(4, 4);
    a5[(1, 2)] = 1.0;
    a5[(3, 0)] = -0.5;
    let mut a6 = DMatrix::zeros(4, 4);
    a6[(3, 2)] = 1.0;
    reps.push(MatrixRep::new(
        "hsp2",
        vec![
            pad(&g5_sl2[0]),
            pad(&g5_sl2[1]),
            pad(&g5_sl2[2]),
            a4.clone(),
            a5.clone(),
            a6.clone(),
        ],
    ));

    // four-dimensional extension of h3: embeds into the hsp generators as
    // (a1, a5, -a4, a6)
    reps.push(MatrixRep::new(
        "h3-ext",
        vec![pad(&g5_sl2[0]), a5, -a4, a6],
    ));

    // signature family on R^3, read off from the linear input vector fields
    for eps in [-1i8, 0, 1] {
        let ee = eps as f64;
        let a1 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let a2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -ee, 0.0, 0.0]);
        let a3 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, ee, 0.0]);
        reps.push(MatrixRep::new(
            match eps {
                -1 => "geps-1",
                0 => "geps0",
                _ => "geps1",
            },
            vec![a1, a2, a3],
        ));
    }

    // left-regular 4x4 representation of the covering four-parameter group
    for eps in [-1i8, 0, 1] {
        let ee = eps as f64;
        let p = 0.5
            * DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, -1.0, 0.0, 0.0, //
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, -1.0, //
                    0.0, 0.0, 1.0, 0.0,
                ],
            );
        let q = 0.5
            * DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, 0.0, -ee, 0.0, //
                    0.0, 0.0, 0.0, ee, //
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, -1.0, 0.0, 0.0,
                ],
            );
        let r = 0.5
            * DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, 0.0, 0.0, -ee, //
                    0.0, 0.0, -ee, 0.0, //
                    0.0, 1.0, 0.0, 0.0, //
                    1.0, 0.0, 0.0, 0.0,
                ],
            );
        reps.push(MatrixRep::new(
            match eps {
                -1 => "gbar-1",
                0 => "gbar0",
                _ => "gbar1",
            },
            vec![p, q, r],
        ));
    }

    reps
}

/// Looks up a bundled matrix representation by algebra key (`"se2"`, `"h3"`,
/// `"h3-classical"`, `"h3-ext"`, `"g5"`, `"hsp2"`, `"geps*"`, `"gbar*"`).
pub fn rep(key: &str) -> Result<&'static MatrixRep, MatGroupError> {
    static REPS: OnceLock<Vec<MatrixRep>> = OnceLock::new();
    REPS.get_or_init(build_reps)
        .iter()
        .find(|r| r.algebra_key == key)
        .ok_or_else(|| MatGroupError::UnknownRep(key.to_string()))
}

/// Time-stamped samples of a point on a homogeneous space.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl StateTrajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    /// Largest componentwise deviation from another trajectory on the same grid.
    pub fn max_distance(&self, other: &StateTrajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// How a Wei-Norman trajectory is mapped back to states.
#[derive(Debug, Clone)]
pub enum Reconstruction {
    /// Form the group element from `v(t)` in the chart's parametrization and
    /// apply the chart action.
    ViaChart { chart: Chart },
    /// Linear action through a matrix representation: `x(t) = G(t) x0`.
    ViaLinearRep { rep_key: String },
    /// Affine action through a matrix representation acting on `(x0, 1)`.
    ViaAffineRep { rep_key: String },
}

/// Group element `Π_k exp(-v[o_k] a_{o_k})` in the group's own coordinates.
pub fn group_from_trajectory_point(
    group: Group,
    order: &[usize],
    v: &DVector<f64>,
) -> Result<GroupElement, MatGroupError> {
    let mut g = GroupElement::identity(group);
    for &alpha in order {
        let f = GroupElement::exp_basis(group, alpha, -v[alpha])?;
        g = compose(&g, &f)?;
    }
    Ok(g)
}

fn chart_algebra(chart: &Chart) -> Vec<&'static str> {
    match chart {
        Chart::UnicycleX | Chart::UnicycleY => vec!["se2", "geps0"],
        Chart::Brockett | Chart::Hopper { .. } => vec!["h3"],
        Chart::GbarHomogeneous { eps } => vec![match eps {
            -1 => "geps-1",
            0 => "geps0",
            _ => "geps1",
        }],
        Chart::AffinePlane => vec!["h3-classical"],
    }
}

/// Maps a solved Wei-Norman trajectory to a state trajectory from `x0`.
pub fn reconstruct_state(
    wn: &WeiNormanTrajectory,
    x0: &[f64],
    how: &Reconstruction,
) -> Result<StateTrajectory, MatGroupError> {
    let mut states = Vec::with_capacity(wn.len());
    match how {
        Reconstruction::ViaChart { chart } => {
            let allowed = chart_algebra(chart);
            if !allowed.contains(&wn.algebra.as_str()) {
                return Err(MatGroupError::WrongAlgebra {
                    expected: allowed.join(" or "),
                    got: wn.algebra.clone(),
                });
            }
            let group = chart.expected_group();
            for (t, v) in wn.times.iter().zip(&wn.coords) {
                let g = group_from_trajectory_point(group, wn.order.indices(), v)?;
                let x = act(&g, x0, chart).map_err(|e| match e {
                    MatGroupError::ChartBreakdown { detail, .. } => {
                        MatGroupError::ChartBreakdown {
                            t: Some(*t),
                            detail,
                        }
                    }
                    other => other,
                })?;
                states.push(x);
            }
        }
        Reconstruction::ViaLinearRep { rep_key } => {
            let rep = rep(rep_key)?;
            if rep.generator_count() != wn.dim() {
                return Err(MatGroupError::RepMismatch {
                    rep: rep.generator_count(),
                    wn: wn.dim(),
                });
            }
            if x0.len() != rep.size() {
                return Err(MatGroupError::BadState {
                    expected: rep.size(),
                    got: x0.len(),
                });
            }
            let x0v = DVector::from_column_slice(x0);
            for v in &wn.coords {
                let g = rep.product_of_exponentials(wn.order.indices(), v);
                states.push((g * &x0v).as_slice().to_vec());
            }
        }
        Reconstruction::ViaAffineRep { rep_key } => {
            let rep = rep(rep_key)?;
            if rep.generator_count() != wn.dim() {
                return Err(MatGroupError::RepMismatch {
                    rep: rep.generator_count(),
                    wn: wn.dim(),
                });
            }
            let n = rep.size();
            if x0.len() != n - 1 {
                return Err(MatGroupError::BadState {
                    expected: n - 1,
                    got: x0.len(),
                });
            }
            let mut hom = DVector::zeros(n);
            for (i, &x) in x0.iter().enumerate() {
                hom[i] = x;
            }
            hom[n - 1] = 1.0;
            for v in &wn.coords {
                let g = rep.product_of_exponentials(wn.order.indices(), v);
                let y = g * &hom;
                states.push(y.as_slice()[..n - 1].to_vec());
            }
        }
    }
    Ok(StateTrajectory {
        times: wn.times.clone(),
        states,
    })
}
