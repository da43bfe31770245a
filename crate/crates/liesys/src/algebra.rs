//! Structure-constant representation of finite-dimensional real Lie algebras.
//!
//! An algebra of dimension `r` is stored as the dense table `c[gamma][alpha][beta]`
//! of the defining relations `[a_alpha, a_beta] = sum_gamma c^gamma_{alpha,beta} a_gamma`.
//! Elements are coefficient vectors in the basis `{a_0, ..., a_{r-1}}`
//! (indices are 0-based throughout the API; the text definition format uses
//! the conventional 1-based indices).

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;

/// Antisymmetry / Jacobi residuals above this are reported as violations.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected coefficient vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("span of basis indices {indices:?} is not closed under the bracket")]
    NotClosed { indices: Vec<usize> },
    #[error("unknown algebra key `{key}`; known keys: {known}")]
    UnknownKey { key: String, known: String },
    #[error("algebra definition parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Dense structure-constant table defining a real Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    name: String,
    dim: usize,
    /// Flat `c[gamma][alpha][beta]`, index `(gamma * dim + alpha) * dim + beta`.
    c: Vec<f64>,
}

impl StructureConstants {
    /// Builds the table from the nonzero relations `[a_alpha, a_beta] = value * a_gamma`
    /// given as 1-based `(alpha, beta, gamma, value)` tuples with `alpha < beta`,
    /// exactly as in the text definition format. The antisymmetric completion
    /// is filled in automatically.
    pub fn from_relations(
        name: impl Into<String>,
        dim: usize,
        relations: &[(usize, usize, usize, f64)],
    ) -> Result<Self, AlgebraError> {
        let mut sc = StructureConstants {
            name: name.into(),
            dim,
            c: vec![0.0; dim * dim * dim],
        };
        let mut seen = std::collections::HashSet::new();
        for &(alpha, beta, gamma, value) in relations {
            for idx in [alpha, beta, gamma] {
                if idx == 0 || idx > dim {
                    return Err(AlgebraError::IndexOutOfRange { index: idx, dim });
                }
            }
            if alpha >= beta {
                return Err(AlgebraError::Parse {
                    line: 0,
                    msg: format!("relation ({alpha},{beta},{gamma}) must have alpha < beta"),
                });
            }
            if !seen.insert((alpha, beta, gamma)) {
                return Err(AlgebraError::Parse {
                    line: 0,
                    msg: format!("duplicate entry ({alpha},{beta},{gamma})"),
                });
            }
            let (a, b, g) = (alpha - 1, beta - 1, gamma - 1);
            *sc.entry_mut(g, a, b) = value;
            *sc.entry_mut(g, b, a) = -value;
        }
        Ok(sc)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c^gamma_{alpha,beta}` (all indices 0-based).
    pub fn c(&self, gamma: usize, alpha: usize, beta: usize) -> f64 {
        self.c[(gamma * self.dim + alpha) * self.dim + beta]
    }

    fn entry_mut(&mut self, gamma: usize, alpha: usize, beta: usize) -> &mut f64 {
        &mut self.c[(gamma * self.dim + alpha) * self.dim + beta]
    }

    /// Coefficient vector of the basis element `a_idx`.
    pub fn basis_element(&self, idx: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[idx] = 1.0;
        e
    }

    /// Bracket `[x, y]` of two coefficient vectors, by bilinear extension of
    /// the defining relations.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>, AlgebraError> {
        for v in [x, y] {
            if v.len() != self.dim {
                return Err(AlgebraError::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        let mut out = DVector::zeros(self.dim);
        for alpha in 0..self.dim {
            if x[alpha] == 0.0 {
                continue;
            }
            for beta in 0..self.dim {
                let xy = x[alpha] * y[beta];
                if xy == 0.0 {
                    continue;
                }
                for gamma in 0..self.dim {
                    out[gamma] += xy * self.c(gamma, alpha, beta);
                }
            }
        }
        Ok(out)
    }

    /// Lists every antisymmetry or Jacobi violation exceeding [`CONSISTENCY_TOL`].
    pub fn check_consistency(&self) -> ConsistencyReport {
        let mut violations = Vec::new();
        let r = self.dim;
        for gamma in 0..r {
            for alpha in 0..r {
                for beta in 0..r {
                    let res = self.c(gamma, alpha, beta) + self.c(gamma, beta, alpha);
                    if res.abs() > CONSISTENCY_TOL {
                        violations.push(ConsistencyViolation::Antisymmetry {
                            gamma,
                            alpha,
                            beta,
                            residual: res,
                        });
                    }
                }
            }
        }
        // sum_mu ( c^mu_{ab} c^nu_{mu,g} + c^mu_{bg} c^nu_{mu,a} + c^mu_{ga} c^nu_{mu,b} ) = 0
        for alpha in 0..r {
            for beta in 0..r {
                for gamma in 0..r {
                    for nu in 0..r {
                        let mut res = 0.0;
                        for mu in 0..r {
                            res += self.c(mu, alpha, beta) * self.c(nu, mu, gamma)
                                + self.c(mu, beta, gamma) * self.c(nu, mu, alpha)
                                + self.c(mu, gamma, alpha) * self.c(nu, mu, beta);
                        }
                        if res.abs() > CONSISTENCY_TOL {
                            violations.push(ConsistencyViolation::Jacobi {
                                alpha,
                                beta,
                                gamma,
                                nu,
                                residual: res,
                            });
                        }
                    }
                }
            }
        }
        ConsistencyReport { violations }
    }

    /// Matrix of `ad(a_beta)` in the basis: `(ad a_beta)_{gamma,alpha} = c^gamma_{beta,alpha}`,
    /// so that `ad_matrix(beta) * e_alpha` is the coefficient vector of `[a_beta, a_alpha]`.
    pub fn ad_matrix(&self, beta: usize) -> Result<DMatrix<f64>, AlgebraError> {
        if beta >= self.dim {
            return Err(AlgebraError::IndexOutOfRange {
                index: beta,
                dim: self.dim,
            });
        }
        let r = self.dim;
        Ok(DMatrix::from_fn(r, r, |gamma, alpha| self.c(gamma, beta, alpha)))
    }

    /// `exp(-v * ad(a_beta))`, exact when the adjoint matrix is nilpotent.
    pub fn exp_ad(&self, v: f64, beta: usize) -> Result<DMatrix<f64>, AlgebraError> {
        let ad = self.ad_matrix(beta)?;
        Ok(linalg::expm(&(-v * ad)))
    }

    /// Dimensions of the derived series `g ⊇ [g,g] ⊇ [[g,g],[g,g]] ⊇ ...`,
    /// starting with `dim` itself and stopping at zero or at the first repeat.
    pub fn derived_series_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.dim];
        let mut basis: Vec<DVector<f64>> =
            (0..self.dim).map(|i| self.basis_element(i)).collect();
        loop {
            let mut brackets = Vec::new();
            for i in 0..basis.len() {
                for j in (i + 1)..basis.len() {
                    brackets.push(self.bracket(&basis[i], &basis[j]).expect("same dim"));
                }
            }
            let next = span_basis(self.dim, &brackets);
            let d = next.len();
            let stable = d == *dims.last().unwrap();
            dims.push(d);
            if d == 0 || stable {
                return dims;
            }
            basis = next;
        }
    }

    /// Solvability: the derived series terminates at zero.
    pub fn is_solvable(&self) -> (bool, Vec<usize>) {
        let dims = self.derived_series_dims();
        (*dims.last().unwrap() == 0, dims)
    }

    /// Orthonormal basis of the smallest subalgebra containing `gens`,
    /// by iterating bracket closure with rank tests until stable.
    pub fn generated_subalgebra(
        &self,
        gens: &[DVector<f64>],
    ) -> Result<Vec<DVector<f64>>, AlgebraError> {
        for g in gens {
            if g.len() != self.dim {
                return Err(AlgebraError::DimensionMismatch {
                    expected: self.dim,
                    got: g.len(),
                });
            }
        }
        let mut basis = span_basis(self.dim, gens);
        loop {
            let mut candidates = basis.clone();
            for i in 0..basis.len() {
                for j in (i + 1)..basis.len() {
                    candidates.push(self.bracket(&basis[i], &basis[j])?);
                }
            }
            let next = span_basis(self.dim, &candidates);
            if next.len() == basis.len() {
                return Ok(next);
            }
            basis = next;
        }
    }

    /// Structure constants of the subalgebra spanned by the given basis
    /// indices. Fails if the span is not closed under the bracket.
    pub fn restrict(&self, indices: &[usize]) -> Result<StructureConstants, AlgebraError> {
        for &i in indices {
            if i >= self.dim {
                return Err(AlgebraError::IndexOutOfRange {
                    index: i,
                    dim: self.dim,
                });
            }
        }
        let k = indices.len();
        let mut sub = StructureConstants {
            name: format!("{}|{:?}", self.name, indices),
            dim: k,
            c: vec![0.0; k * k * k],
        };
        for (ia, &alpha) in indices.iter().enumerate() {
            for (ib, &beta) in indices.iter().enumerate() {
                for gamma in 0..self.dim {
                    let v = self.c(gamma, alpha, beta);
                    if v == 0.0 {
                        continue;
                    }
                    match indices.iter().position(|&g| g == gamma) {
                        Some(ig) => *sub.entry_mut(ig, ia, ib) = v,
                        None => {
                            return Err(AlgebraError::NotClosed {
                                indices: indices.to_vec(),
                            })
                        }
                    }
                }
            }
        }
        Ok(sub)
    }
}

fn span_basis(_dim: usize, vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(vectors);
    // inputs are unit basis vectors and O(1) bracket tables, so anything this
    // small is rounding dust, not a one-dimensional span
    if m.amax() < 1e-10 {
        return Vec::new();
    }
    linalg::column_span_basis(&m, linalg::RANK_REL_TOL)
}

/// One defect found by [`StructureConstants::check_consistency`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConsistencyViolation {
    Antisymmetry {
        gamma: usize,
        alpha: usize,
        beta: usize,
        residual: f64,
    },
    Jacobi {
        alpha: usize,
        beta: usize,
        gamma: usize,
        nu: usize,
        residual: f64,
    },
}

/// Outcome of a consistency sweep; empty means the table is a valid algebra.
#[derive(Debug, Clone, Default)]
pub struct ConsistencyReport {
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "consistent");
        }
        for v in &self.violations {
            match v {
                ConsistencyViolation::Antisymmetry {
                    gamma,
                    alpha,
                    beta,
                    residual,
                } => writeln!(
                    f,
                    "antisymmetry violation at c^{}_({},{}) residual {residual:e}",
                    gamma + 1,
                    alpha + 1,
                    beta + 1
                )?,
                ConsistencyViolation::Jacobi {
                    alpha,
                    beta,
                    gamma,
                    nu,
                    residual,
                } => writeln!(
                    f,
                    "Jacobi violation at (a,b,g,nu)=({},{},{},{}) residual {residual:e}",
                    alpha + 1,
                    beta + 1,
                    gamma + 1,
                    nu + 1
                )?,
            }
        }
        Ok(())
    }
}

/// A named algebra bundled with the crate.
pub struct RegistryEntry {
    pub key: &'static str,
    pub constants: StructureConstants,
    /// Where the relations come from / what the algebra is.
    pub notes: &'static str,
    /// Factorization order (0-based) used by the bundled models for this
    /// algebra; ascending when no specific order is called for.
    pub default_order: Vec<usize>,
}

fn build_registry() -> Vec<RegistryEntry> {
    let mk = |name: &str, dim, rels: &[(usize, usize, usize, f64)]| {
        StructureConstants::from_relations(name, dim, rels).expect("registry relations are valid")
    };
    vec![
        RegistryEntry {
            key: "h3",
            constants: mk("h3", 3, &[(1, 2, 3, 1.0)]),
            notes: "Heisenberg-Weyl algebra, [a1,a2]=a3 central",
            default_order: vec![0, 1, 2],
        },
        RegistryEntry {
            key: "h3-classical",
            constants: mk("h3-classical", 3, &[(1, 2, 3, -1.0)]),
            notes: "Heisenberg-Weyl algebra in the sign convention of the classical \
                    linear-potential model, [a1,a2]=-a3",
            default_order: vec![2, 1, 0],
        },
        RegistryEntry {
            key: "h3-ext",
            constants: mk("h3-ext", 4, &[(1, 2, 3, 1.0), (2, 3, 4, 1.0)]),
            notes: "central extension of h3 arising in the quantum linear-potential model",
            default_order: vec![3, 1, 2, 0],
        },
        RegistryEntry {
            key: "se2",
            constants: mk("se2", 3, &[(1, 2, 3, 1.0), (1, 3, 2, -1.0)]),
            notes: "Euclidean algebra of the plane; unicycle kinematics",
            default_order: vec![0, 1, 2],
        },
        RegistryEntry {
            key: "sl2",
            constants: mk("sl2", 3, &[(1, 2, 1, 1.0), (1, 3, 2, 2.0), (2, 3, 3, 1.0)]),
            notes: "sl(2,R) in the quadratic-Hamiltonian basis",
            default_order: vec![0, 1, 2],
        },
        RegistryEntry {
            key: "g5",
            constants: mk(
                "g5",
                5,
                &[
                    (1, 2, 1, 1.0),
                    (1, 3, 2, 2.0),
                    (1, 5, 4, -1.0),
                    (2, 3, 3, 1.0),
                    (2, 4, 4, -0.5),
                    (2, 5, 5, 0.5),
                    (3, 4, 5, 1.0),
                ],
            ),
            notes: "R^2 ⋊ sl(2,R): classical time-dependent quadratic Hamiltonian",
            default_order: vec![3, 4, 0, 1, 2],
        },
        RegistryEntry {
            key: "hsp2",
            constants: mk(
                "hsp2",
                6,
                &[
                    (1, 2, 1, 1.0),
                    (1, 3, 2, 2.0),
                    (1, 5, 4, -1.0),
                    (2, 3, 3, 1.0),
                    (2, 4, 4, -0.5),
                    (2, 5, 5, 0.5),
                    (3, 4, 5, 1.0),
                    (4, 5, 6, 1.0),
                ],
            ),
            notes: "extended symplectic algebra h3 ⋊ sl(2,R): quantum quadratic Hamiltonian",
            default_order: vec![3, 4, 5, 0, 1, 2],
        },
        RegistryEntry {
            key: "geps-1",
            constants: mk("geps-1", 3, &[(1, 2, 3, 1.0), (2, 3, 1, -1.0), (1, 3, 2, -1.0)]),
            notes: "signature family at eps=-1 (so(2,1)); elastic rod kinematics",
            default_order: vec![0, 1, 2],
        },
        RegistryEntry {
            key: "geps0",
            constants: mk("geps0", 3, &[(1, 2, 3, 1.0), (1, 3, 2, -1.0)]),
            notes: "signature family at eps=0, isomorphic to se2",
            default_order: vec![0, 1, 2],
        },
        RegistryEntry {
            key: "geps1",
            constants: mk("geps1", 3, &[(1, 2, 3, 1.0), (2, 3, 1, 1.0), (1, 3, 2, -1.0)]),
            notes: "signature family at eps=+1 (so(3)); elastic rod kinematics",
            default_order: vec![0, 1, 2],
        },
    ]
}

/// The compiled-in algebra registry.
pub fn registry() -> &'static [RegistryEntry] {
    static REG: OnceLock<Vec<RegistryEntry>> = OnceLock::new();
    REG.get_or_init(build_registry)
}

/// Looks up a compiled-in algebra by key.
pub fn lookup(key: &str) -> Result<&'static RegistryEntry, AlgebraError> {
    registry()
        .iter()
        .find(|e| e.key == key)
        .ok_or_else(|| AlgebraError::UnknownKey {
            key: key.to_string(),
            known: registry()
                .iter()
                .map(|e| e.key)
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Signature-family algebra for a given `eps` in {-1, 0, 1}.
pub fn geps(eps: i8) -> &'static StructureConstants {
    let key = match eps {
        -1 => "geps-1",
        0 => "geps0",
        1 => "geps1",
        _ => panic!("eps must be -1, 0 or 1"),
    };
    &lookup(key).expect("registry key").constants
}

/// Parses algebra definitions from the text format: one record per algebra,
///
/// ```text
/// name <label>
/// dim <r>
/// <alpha> <beta> <gamma> <value>     # one line per nonzero c^gamma_{alpha,beta}, alpha < beta
/// ```
///
/// Indices are 1-based; the antisymmetric completion is implied. Blank lines
/// and `#` comments are ignored. Duplicate `(alpha,beta,gamma)` entries are
/// rejected.
pub fn parse_definitions(text: &str) -> Result<Vec<StructureConstants>, AlgebraError> {
    struct Pending {
        name: String,
        dim: Option<usize>,
        rels: Vec<(usize, usize, usize, f64)>,
        seen: std::collections::HashSet<(usize, usize, usize)>,
        line: usize,
    }
    let finish = |p: Pending| -> Result<StructureConstants, AlgebraError> {
        let dim = p.dim.ok_or(AlgebraError::Parse {
            line: p.line,
            msg: format!("record `{}` has no dim line", p.name),
        })?;
        StructureConstants::from_relations(p.name, dim, &p.rels)
    };

    let mut out = Vec::new();
    let mut current: Option<Pending> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "name" => {
                if let Some(p) = current.take() {
                    out.push(finish(p)?);
                }
                if fields.len() != 2 {
                    return Err(AlgebraError::Parse {
                        line,
                        msg: "expected `name <label>`".into(),
                    });
                }
                current = Some(Pending {
                    name: fields[1].to_string(),
                    dim: None,
                    rels: Vec::new(),
                    seen: Default::default(),
                    line,
                });
            }
            "dim" => {
                let p = current.as_mut().ok_or(AlgebraError::Parse {
                    line,
                    msg: "dim before any name line".into(),
                })?;
                let d: usize = fields
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .filter(|&d| d > 0)
                    .ok_or(AlgebraError::Parse {
                        line,
                        msg: "expected `dim <positive integer>`".into(),
                    })?;
                p.dim = Some(d);
            }
            _ => {
                let p = current.as_mut().ok_or(AlgebraError::Parse {
                    line,
                    msg: "structure constant before any name line".into(),
                })?;
                if fields.len() != 4 {
                    return Err(AlgebraError::Parse {
                        line,
                        msg: "expected `alpha beta gamma value`".into(),
                    });
                }
                let parse_idx = |s: &str| -> Result<usize, AlgebraError> {
                    s.parse().map_err(|_| AlgebraError::Parse {
                        line,
                        msg: format!("bad index `{s}`"),
                    })
                };
                let alpha = parse_idx(fields[0])?;
                let beta = parse_idx(fields[1])?;
                let gamma = parse_idx(fields[2])?;
                let value: f64 = fields[3].parse().map_err(|_| AlgebraError::Parse {
                    line,
                    msg: format!("bad value `{}`", fields[3]),
                })?;
                if alpha >= beta {
                    return Err(AlgebraError::Parse {
                        line,
                        msg: format!("entries require alpha < beta, got ({alpha},{beta})"),
                    });
                }
                if !p.seen.insert((alpha, beta, gamma)) {
                    return Err(AlgebraError::Parse {
                        line,
                        msg: format!("duplicate entry ({alpha},{beta},{gamma})"),
                    });
                }
                p.rels.push((alpha, beta, gamma, value));
            }
        }
    }
    if let Some(p) = current.take() {
        out.push(finish(p)?);
    }
    Ok(out)
}
