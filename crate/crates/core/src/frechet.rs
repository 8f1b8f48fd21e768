//! Fréchet distance between two vector sets summarized as Gaussians.

use alloc::vec::Vec;

use crate::linalg::{covariance, mean, Matrix, SymmetricEigen};
use crate::{Error, Result};

/// Eigenvalues of the covariance product below this are treated as errors;
/// anything between it and zero is round-off and clamped.
pub const EIGEN_TOLERANCE: f64 = -1e-8;

/// Squared Fréchet distance
/// `‖μA − μB‖² + tr(ΣA) + tr(ΣB) − 2·tr((ΣA^½ ΣB ΣA^½)^½)`.
///
/// Both sets need at least two vectors of the same dimension.
pub fn frechet_distance(set_a: &[Vec<f64>], set_b: &[Vec<f64>]) -> Result<f64> {
    for set in [set_a, set_b] {
        if set.len() < 2 {
            return Err(Error::TooFewVectors {
                required: 2,
                found: set.len(),
            });
        }
    }
    let mu_a = mean(set_a)?;
    let mu_b = mean(set_b)?;
    if mu_a.len() != mu_b.len() {
        return Err(Error::DimensionMismatch {
            expected: mu_a.len(),
            found: mu_b.len(),
        });
    }
    let cov_a = covariance(set_a, &mu_a)?;
    let cov_b = covariance(set_b, &mu_b)?;
    frechet_from_moments(&mu_a, &cov_a, &mu_b, &cov_b)
}

pub fn frechet_from_moments(mu_a: &[f64], cov_a: &Matrix, mu_b: &[f64], cov_b: &Matrix) -> Result<f64> {
    let mean_term: f64 = mu_a.iter().zip(mu_b).map(|(a, b)| (a - b) * (a - b)).sum();

    let root_a = SymmetricEigen::new(cov_a).reconstruct(|l| libm::sqrt(l.max(0.0)));
    let mut inner = root_a.matmul(cov_b).matmul(&root_a);
    inner.symmetrize();
    let mut cross = 0.0;
    for l in SymmetricEigen::new(&inner).values {
        if l < EIGEN_TOLERANCE {
            return Err(Error::NegativeEigenvalue(l));
        }
        cross += libm::sqrt(l.max(0.0));
    }

    let d2 = mean_term + cov_a.trace() + cov_b.trace() - 2.0 * cross;
    Ok(d2.max(0.0))
}
