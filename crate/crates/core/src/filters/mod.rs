//! Mode and state estimators.
//!
//! Every estimator consumes the pair `(u_{k−1}, y_k)` at step `k`, where
//! `u_{k−1}` is the input the controller sent one step earlier, and reports its
//! estimate of the mode `θ_{k−1}` that governed the transition into `x_k`.

mod alg1;
mod alg2;
mod gaussian;
mod imm;
mod kalman;
mod posterior;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use alg1::{alg1_const_sigma, Alg1, Alg1State, KalmanContext};
pub use alg2::{alg2_predict, Alg2, Alg2State};
pub use gaussian::{gaussian_log_pdf, gaussian_pdf};
pub use imm::{Imm, ImmState};
pub use kalman::{kf_step, kf_update, GaussianBelief, KalmanUpdate, StepModel};
pub use posterior::{mode_argmax, mode_posterior_update, mode_posterior_update_log, PosteriorUpdate};

pub use crate::markov::ModePosterior;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Input-output predictor with constant output covariance.
    Alg1,
    /// Single-Kalman-filter predictor.
    Alg2,
    /// Interacting multiple model baseline.
    Imm,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Alg1, EstimatorKind::Alg2, EstimatorKind::Imm];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Alg1 => "alg1",
            EstimatorKind::Alg2 => "alg2",
            EstimatorKind::Imm => "imm",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alg1" => Ok(EstimatorKind::Alg1),
            "alg2" => Ok(EstimatorKind::Alg2),
            "imm" => Ok(EstimatorKind::Imm),
            other => Err(Error::Domain(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Per-step diagnostics exposed to the trial logger.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub posterior: Vector,
    pub log_likelihoods: Vector,
    pub mode: Mode,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Estimate of `θ_{k−1}`.
    pub mode: Mode,
    /// `x̂_{k|k}` when the estimator tracks the state.
    pub state: Option<Vector>,
    pub diagnostics: StepDiagnostics,
}

pub trait Estimator: Send {
    fn kind(&self) -> EstimatorKind;

    /// Processes the measurement `y_k` given the input `u_{k−1}`.
    fn step(&mut self, u_prev: &Vector, y: &Vector) -> Result<StepOutput>;
}
