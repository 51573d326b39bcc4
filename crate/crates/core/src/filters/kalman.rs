use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// State mean and covariance `(x̂, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector,
    pub cov: Matrix,
}

impl GaussianBelief {
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        if cov.shape() != (mean.len(), mean.len()) {
            return Err(Error::dim(
                "belief covariance",
                format!("{0}×{0}", mean.len()),
                format!("{:?}", cov.shape()),
            ));
        }
        if !linalg::is_symmetric_psd(&cov, 1e-10) {
            return Err(Error::Domain("belief covariance must be symmetric PSD".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Matrices of the mode-matched model used by one Kalman step.
#[derive(Debug, Clone, Copy)]
pub struct StepModel<'a> {
    pub a: &'a Matrix,
    pub b: &'a Matrix,
    pub c: &'a Matrix,
    pub q: &'a Matrix,
    pub r: &'a Matrix,
}

/// Result of a Kalman step together with the innovation statistics.
#[derive(Debug, Clone)]
pub struct KalmanUpdate {
    pub belief: GaussianBelief,
    /// `y − C x̂_{k|k−1}`
    pub innovation: Vector,
    /// `C P_{k|k−1} Cᵀ + R`
    pub innovation_cov: Matrix,
}

fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite values in {what}")))
    }
}

/// Predict with `(A, B, Q)` then correct with `(C, R)` and measurement `y`.
pub fn kf_update(
    model: StepModel<'_>,
    belief: &GaussianBelief,
    u_prev: &Vector,
    y: &Vector,
) -> Result<KalmanUpdate> {
    let n = belief.dim();
    if model.a.shape() != (n, n) {
        return Err(Error::dim("A", format!("{n}×{n}"), format!("{:?}", model.a.shape())));
    }
    if model.b.shape() != (n, u_prev.len()) {
        return Err(Error::dim(
            "B",
            format!("{n}×{}", u_prev.len()),
            format!("{:?}", model.b.shape()),
        ));
    }
    if model.c.ncols() != n || model.c.nrows() != y.len() {
        return Err(Error::dim(
            "C",
            format!("{}×{n}", y.len()),
            format!("{:?}", model.c.shape()),
        ));
    }
    check_finite("measurement", y.iter().copied())?;
    check_finite("input", u_prev.iter().copied())?;
    check_finite("belief", belief.mean.iter().chain(belief.cov.iter()).copied())?;

    let x_pred = model.a * &belief.mean + model.b * u_prev;
    let p_pred = linalg::symmetrize(&(model.a * &belief.cov * model.a.transpose() + model.q));

    let innovation = y - model.c * &x_pred;
    let innovation_cov = linalg::symmetrize(&(model.c * &p_pred * model.c.transpose() + model.r));
    let chol = linalg::cholesky(&innovation_cov, "innovation covariance")?;
    // K = P Cᵀ S⁻¹, obtained from S Kᵀ = C P
    let gain = chol.solve(&(model.c * &p_pred)).transpose();

    let mean = &x_pred + &gain * &innovation;
    let cov = linalg::symmetrize(&(&p_pred - &gain * model.c * &p_pred));
    check_finite("updated belief", mean.iter().chain(cov.iter()).copied())?;
    Ok(KalmanUpdate {
        belief: GaussianBelief { mean, cov },
        innovation,
        innovation_cov,
    })
}

/// One Kalman filter cycle; see [`kf_update`].
pub fn kf_step(
    model: StepModel<'_>,
    belief: &GaussianBelief,
    u_prev: &Vector,
    y: &Vector,
) -> Result<GaussianBelief> {
    kf_update(model, belief, u_prev, y).map(|u| u.belief)
}
