//! Wineland squeezing parameter and closed-form reference curves.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::discrete::lambda_coefficient;
use crate::{Error, Result};

/// Largest eigenvalue ratio of the spin covariance still treated as resolved.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    pub xi2: f64,
    /// `-10 log10(xi2)`; positive means squeezed.
    pub xi2_db: f64,
    /// Direction of the squeezed quadrature in the `(J_y, J_z)` plane,
    /// measured from `J_y` toward `J_z`, in `[0, pi)`.
    pub theta_opt: f64,
    pub mean_jx_out: f64,
}

pub fn to_db(xi2: f64) -> f64 {
    -10.0 * xi2.log10()
}

/// Squeezing parameter of a normalized spin covariance.
///
/// The covariance is in units of the input spin length, so
/// `xi^2 = 2 lambda_min (<J_x>_in / <J_x>_out)^2`. Fails with
/// [`Error::IllConditioned`] when the covariance is too elongated for its
/// small eigenvalue to be trusted.
pub fn xi_squared(spin_cov: &Matrix2<f64>, mean_jx_out: f64, mean_jx_in: f64) -> Result<SqueezingResult> {
    if !(mean_jx_out > 0.0) || !(mean_jx_in > 0.0) {
        return Err(Error::invalid("mean_jx", mean_jx_out.min(mean_jx_in), "mean_jx > 0"));
    }
    if spin_cov.iter().any(|x| !x.is_finite()) {
        return Err(Error::ModelViolation("non-finite spin covariance".into()));
    }
    let eig = SymmetricEigen::new(0.5 * (spin_cov + spin_cov.transpose()));
    let (imin, imax) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (lmin, lmax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
    if !(lmin > 0.0) || lmax / lmin > MAX_CONDITION {
        return Err(Error::IllConditioned(if lmin > 0.0 { lmax / lmin } else { f64::INFINITY }));
    }
    let theta_opt = if lmax - lmin <= 1e-12 * lmax {
        0.0
    } else {
        let v = eig.eigenvectors.column(imin);
        v[1].atan2(v[0]).rem_euclid(PI) % PI
    };
    let ratio = mean_jx_in / mean_jx_out;
    let xi2 = 2.0 * lmin * ratio * ratio;
    Ok(SqueezingResult {
        xi2,
        xi2_db: to_db(xi2),
        theta_opt,
        mean_jx_out,
    })
}

/// Double-pass squeezing `1 + (k^4/2 + k^2)(1 - sqrt(1 + 4/(2 + k^2)^2))`.
pub fn dp_reference(kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    let a = 0.5 * k2 * k2 + k2;
    // same value as the textbook form, without cancellation at large kappa
    1.0 + a - (a * a + k2 * k2).sqrt()
}

/// Pure shear of strength `mu = Lambda kappa^2` applied to a coherent state.
pub fn ideal_oat_reference(kappa: f64, n_passes: usize) -> f64 {
    let mu = lambda_coefficient(n_passes) * kappa * kappa;
    let disc = mu * (1.0 + 0.25 * mu * mu).sqrt();
    let sum = 1.0 + 0.5 * mu * mu;
    // product of the two roots is 1
    1.0 / (sum + disc)
}

/// Lossless two-axis twisting `exp(-Lambda kappa^2)`.
pub fn ideal_tat_reference(kappa: f64, n_passes: usize) -> f64 {
    (-lambda_coefficient(n_passes) * kappa * kappa).exp()
}
