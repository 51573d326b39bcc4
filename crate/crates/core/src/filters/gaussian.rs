//! Multivariate normal density of a predicted output, via Cholesky.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// `ln N(y; ŷ, Σ)`.
pub fn gaussian_log_pdf(y: &Vector, yhat: &Vector, sigma: &Matrix) -> Result<f64> {
    let m = y.len();
    if yhat.len() != m {
        return Err(Error::dim("predicted output", m, yhat.len()));
    }
    if sigma.shape() != (m, m) {
        return Err(Error::dim("Σ", format!("{m}×{m}"), format!("{:?}", sigma.shape())));
    }
    let chol = linalg::cholesky(sigma, "output covariance")?;
    let diff = y - yhat;
    let z = chol
        .l_dirty()
        .solve_lower_triangular(&diff)
        .ok_or_else(|| Error::Numerical("singular output covariance".into()))?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let value = -0.5 * (m as f64 * (2.0 * PI).ln() + log_det + z.norm_squared());
    if value.is_nan() {
        return Err(Error::Numerical("log-density is NaN".into()));
    }
    Ok(value)
}

/// `N(y; ŷ, Σ)`.
pub fn gaussian_pdf(y: &Vector, yhat: &Vector, sigma: &Matrix) -> Result<f64> {
    gaussian_log_pdf(y, yhat, sigma).map(f64::exp)
}
