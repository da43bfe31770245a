//! Small dense-matrix helpers shared across the crate: matrix exponentials
//! with exact handling of nilpotent arguments, rank decisions, and linear
//! solves with a condition estimate. Everything here targets the tiny
//! matrices of this crate (dimension at most 6).

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Returns the smallest `k <= max_power` with `a^k = 0`, if any.
///
/// Entries of our adjoint and representation matrices are exact small
/// rationals, so powers of genuinely nilpotent matrices hit zero exactly;
/// the tolerance only guards against harmless dust.
pub fn nilpotency_index(a: &DMatrix<f64>, max_power: usize) -> Option<usize> {
    let mut p = a.clone();
    for k in 1..=max_power {
        if p.amax() < 1e-14 {
            return Some(k);
        }
        p = &p * a;
    }
    if p.amax() < 1e-14 {
        return Some(max_power + 1);
    }
    None
}

/// Matrix exponential. Nilpotent arguments (index found by inspecting powers
/// up to the dimension) are summed exactly as a finite polynomial; everything
/// else goes through scaling-and-squaring with a Taylor series truncated
/// below 1e-16 relative.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if let Some(k) = nilpotency_index(a, n) {
        // exp(a) = sum_{j<k} a^j / j!
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for j in 1..k {
            term = &term * a / j as f64;
            sum += &term;
        }
        return sum;
    }

    let norm = a.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for j in 1..64 {
        term = &term * &scaled / j as f64;
        sum += &term;
        if term.amax() <= 1e-16 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Rank of the column span of `m`, singular values below
/// `rel_tol * sigma_max` counting as zero.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the column span of `m` (left singular vectors of the
/// significant singular values).
pub fn column_span_basis(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u requested");
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect()
}

/// Solves `m x = b` by LU with partial pivoting and returns the solution
/// together with a 1-norm condition estimate `cond1 = |m|_1 |m^-1|_1`.
/// `None` when the factorization is singular to working precision.
pub fn solve_with_cond(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let lu = m.clone().lu();
    let x = lu.solve(b)?;
    let inv = lu.try_inverse()?;
    let norm1 = |a: &DMatrix<f64>| {
        (0..a.ncols())
            .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    Some((x, norm1(m) * norm1(&inv)))
}

/// Frobenius distance between two matrices.
pub fn frobenius_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}
