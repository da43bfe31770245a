//! Superposition for the scalar Riccati equation: the cross ratio of four
//! solutions is constant in time, so three particular solutions and one
//! constant determine the general solution.

use super::ModelError;

/// Cross ratio `((x - x1)(x2 - x3)) / ((x - x3)(x2 - x1))`.
pub fn cross_ratio(x: f64, x1: f64, x2: f64, x3: f64) -> Result<f64, ModelError> {
    let den = (x - x3) * (x2 - x1);
    let scale = [x, x1, x2, x3].iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if den.abs() < 1e-12 * scale * scale {
        return Err(ModelError::DegenerateCrossRatio);
    }
    Ok((x - x1) * (x2 - x3) / den)
}

/// The point `x` with `cross_ratio(x, x1, x2, x3) = k`, given three pairwise
/// distinct particular solutions at a common time.
pub fn riccati_superpose(x1: f64, x2: f64, x3: f64, k: f64) -> Result<f64, ModelError> {
    let scale = [x1, x2, x3].iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if (x1 - x2).abs() < 1e-12 * scale
        || (x2 - x3).abs() < 1e-12 * scale
        || (x1 - x3).abs() < 1e-12 * scale
    {
        return Err(ModelError::NotDistinct);
    }
    let den = (x2 - x3) - k * (x2 - x1);
    if den.abs() < 1e-12 * scale {
        return Err(ModelError::DegenerateCrossRatio);
    }
    Ok((x1 * (x2 - x3) - k * x3 * (x2 - x1)) / den)
}
