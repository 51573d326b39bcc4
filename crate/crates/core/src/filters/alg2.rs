//! Joint mode and state estimation around a single Kalman filter.
//!
//! Candidate outputs are predicted from the filtered state,
//! `ŷ_j = C (A(j) x̂_{k−1|k−1} + B(j) u_{k−1})` with covariance
//! `C A(j) P A(j)ᵀ Cᵀ + C Q Cᵀ + R`; the filter then advances with the most
//! probable mode.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::markov::{ModePosterior, TransitionMatrix};
use crate::model::{AugmentedModel, Mode};

use super::gaussian::gaussian_log_pdf;
use super::kalman::{kf_step, GaussianBelief, StepModel};
use super::posterior::mode_posterior_update_log;
use super::{Estimator, EstimatorKind, StepDiagnostics, StepOutput};

/// Predicted output and its covariance under candidate mode `j`.
pub fn alg2_predict(
    aug: &AugmentedModel,
    belief: &GaussianBelief,
    u_prev: &Vector,
    candidate: Mode,
) -> Result<(Vector, Matrix)> {
    let a = aug.transition(candidate)?;
    let b = aug.input(candidate)?;
    predict_with(aug, &a, &b, belief, u_prev)
}

fn predict_with(
    aug: &AugmentedModel,
    a: &Matrix,
    b: &Matrix,
    belief: &GaussianBelief,
    u_prev: &Vector,
) -> Result<(Vector, Matrix)> {
    if belief.dim() != aug.state_dim() {
        return Err(Error::dim("belief", aug.state_dim(), belief.dim()));
    }
    if u_prev.len() != b.ncols() {
        return Err(Error::dim("u", b.ncols(), u_prev.len()));
    }
    let c = aug.output();
    let ca = c * a;
    let yhat = &ca * &belief.mean + c * (b * u_prev);
    let sigma = &ca * &belief.cov * ca.transpose()
        + c * aug.process_noise() * c.transpose()
        + aug.measurement_noise();
    Ok((yhat, linalg::symmetrize(&sigma)))
}

#[derive(Debug, Clone)]
pub struct Alg2State {
    pub belief: GaussianBelief,
    pub posterior: ModePosterior,
}

#[derive(Debug, Clone)]
pub struct Alg2 {
    aug: AugmentedModel,
    chain: TransitionMatrix,
    // A(j), B(j) for every mode
    matrices: Vec<(Matrix, Matrix)>,
    state: Alg2State,
}

impl Alg2 {
    pub fn new(
        aug: AugmentedModel,
        chain: TransitionMatrix,
        belief: GaussianBelief,
        prior: ModePosterior,
    ) -> Result<Self> {
        let s = aug.space().size();
        if chain.size() != s {
            return Err(Error::dim("transition matrix", s, chain.size()));
        }
        if prior.len() != s {
            return Err(Error::dim("mode prior", s, prior.len()));
        }
        if belief.dim() != aug.state_dim() {
            return Err(Error::dim("initial belief", aug.state_dim(), belief.dim()));
        }
        let matrices = aug
            .space()
            .modes()
            .map(|j| Ok((aug.transition(j)?, aug.input(j)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            aug,
            chain,
            matrices,
            state: Alg2State {
                belief,
                posterior: prior,
            },
        })
    }

    pub fn state(&self) -> &Alg2State {
        &self.state
    }

    /// Advances the filter with a prescribed mode sequence entry and a
    /// posterior pinned to it.
    pub fn step_with_known_mode(&mut self, mode: Mode, u_prev: &Vector, y: &Vector) -> Result<Vector> {
        let mode = self.aug.space().check(mode)?;
        let (a, b) = &self.matrices[mode.index()];
        self.state.belief = kf_step(self.step_model(a, b), &self.state.belief, u_prev, y)?;
        self.state.posterior = ModePosterior::point_mass(self.aug.space().size(), mode);
        Ok(self.state.belief.mean.clone())
    }

    fn step_model<'a>(&'a self, a: &'a Matrix, b: &'a Matrix) -> StepModel<'a> {
        StepModel {
            a,
            b,
            c: self.aug.output(),
            q: self.aug.process_noise(),
            r: self.aug.measurement_noise(),
        }
    }
}

impl Estimator for Alg2 {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Alg2
    }

    fn step(&mut self, u_prev: &Vector, y: &Vector) -> Result<StepOutput> {
        if y.len() != self.aug.base().m() {
            return Err(Error::dim("y", self.aug.base().m(), y.len()));
        }
        let mut log_liks = Vector::zeros(self.matrices.len());
        for (j, (a, b)) in self.matrices.iter().enumerate() {
            let (yhat, sigma) = predict_with(&self.aug, a, b, &self.state.belief, u_prev)?;
            log_liks[j] = gaussian_log_pdf(y, &yhat, &sigma)?;
        }
        let update = mode_posterior_update_log(&self.state.posterior, &log_liks, &self.chain)?;
        let estimate = update.posterior.argmax();
        let (a, b) = &self.matrices[estimate.index()];
        self.state.belief = kf_step(self.step_model(a, b), &self.state.belief, u_prev, y)?;
        self.state.posterior = update.posterior;
        Ok(StepOutput {
            mode: estimate,
            state: Some(self.state.belief.mean.clone()),
            diagnostics: StepDiagnostics {
                posterior: self.state.posterior.probs().clone(),
                log_likelihoods: log_liks,
                mode: estimate,
                fallback: update.fallback,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LossStrategy, PlantModel};

    fn scalar(a: f64, q: f64, r: f64, strategy: LossStrategy) -> AugmentedModel {
        let plant = PlantModel::new(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, q),
            Matrix::from_element(1, 1, r),
        )
        .unwrap();
        AugmentedModel::new(plant, strategy).unwrap()
    }

    #[test]
    fn degenerate_belief_gives_r() {
        let aug = scalar(0.7, 0.0, 0.3, LossStrategy::Hold);
        let belief = GaussianBelief::new(Vector::from_column_slice(&[1.0, 2.0]), Matrix::zeros(2, 2))
            .unwrap();
        for j in aug.space().modes() {
            let (_, sigma) = alg2_predict(&aug, &belief, &Vector::from_element(1, 1.0), j).unwrap();
            assert_eq!(sigma, Matrix::from_element(1, 1, 0.3));
        }
    }

    #[test]
    fn scalar_covariance_by_substitution() {
        let aug = scalar(1.0, 1.0, 0.5, LossStrategy::Zero);
        let belief =
            GaussianBelief::new(Vector::zeros(1), Matrix::from_element(1, 1, 2.0)).unwrap();
        let (yhat, sigma) =
            alg2_predict(&aug, &belief, &Vector::zeros(1), Mode::from_index(1)).unwrap();
        assert_eq!(sigma[(0, 0)], 3.5);
        assert_eq!(yhat[0], 0.0);
    }

    #[test]
    fn zero_belief_and_input_predict_zero() {
        let aug = scalar(0.9, 0.1, 0.5, LossStrategy::Hold);
        let belief = GaussianBelief::new(Vector::zeros(2), Matrix::identity(2, 2)).unwrap();
        for j in aug.space().modes() {
            let (yhat, _) = alg2_predict(&aug, &belief, &Vector::zeros(1), j).unwrap();
            assert_eq!(yhat, Vector::zeros(1));
        }
    }
}
