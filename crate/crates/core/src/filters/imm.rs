//! Interacting multiple model baseline: one Kalman filter per mode with
//! Markov mixing, likelihood-weighted model probabilities and a
//! moment-matched combined estimate. The mode estimate is the most probable
//! model.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::markov::{predict_prior, ModePosterior, TransitionMatrix};
use crate::model::AugmentedModel;

use super::gaussian::gaussian_log_pdf;
use super::kalman::{kf_update, GaussianBelief, StepModel};
use super::posterior::mode_posterior_update_log;
use super::{Estimator, EstimatorKind, StepDiagnostics, StepOutput};

#[derive(Debug, Clone)]
pub struct ImmState {
    pub beliefs: Vec<GaussianBelief>,
    pub model_probs: ModePosterior,
}

#[derive(Debug, Clone)]
pub struct Imm {
    aug: AugmentedModel,
    chain: TransitionMatrix,
    matrices: Vec<(Matrix, Matrix)>,
    state: ImmState,
}

/// Probability-weighted mean and spread-of-means covariance.
fn moment_match(weights: impl Iterator<Item = f64> + Clone, beliefs: &[GaussianBelief]) -> GaussianBelief {
    let dim = beliefs[0].dim();
    let mut mean = Vector::zeros(dim);
    for (w, b) in weights.clone().zip(beliefs) {
        mean.axpy(w, &b.mean, 1.0);
    }
    let mut cov = Matrix::zeros(dim, dim);
    for (w, b) in weights.zip(beliefs) {
        let d = &b.mean - &mean;
        cov += (&b.cov + &d * d.transpose()) * w;
    }
    GaussianBelief {
        mean,
        cov: linalg::symmetrize(&cov),
    }
}

impl Imm {
    /// Every mode-matched filter starts from `belief`.
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
            state: ImmState {
                beliefs: vec![belief; s],
                model_probs: prior,
            },
        })
    }

    pub fn state(&self) -> &ImmState {
        &self.state
    }

    /// Moment-matched combination of the mode-matched beliefs.
    pub fn combined(&self) -> GaussianBelief {
        moment_match(
            self.state.model_probs.probs().iter().copied(),
            &self.state.beliefs,
        )
    }

    fn mixed_beliefs(&self) -> Result<Vec<GaussianBelief>> {
        let mu = self.state.model_probs.probs();
        let predicted = predict_prior(&self.state.model_probs, &self.chain)?;
        let p = self.chain.matrix();
        Ok((0..mu.len())
            .map(|j| {
                if predicted[j] <= 0.0 {
                    // mode j unreachable: nothing to mix into it
                    return self.state.beliefs[j].clone();
                }
                let norm = predicted[j];
                let weights = (0..mu.len()).map(move |i| p[(i, j)] * mu[i] / norm);
                moment_match(weights, &self.state.beliefs)
            })
            .collect())
    }
}

impl Estimator for Imm {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Imm
    }

    fn step(&mut self, u_prev: &Vector, y: &Vector) -> Result<StepOutput> {
        let mixed = self.mixed_beliefs()?;
        let mut beliefs = Vec::with_capacity(mixed.len());
        let mut log_liks = Vector::zeros(mixed.len());
        for (j, ((a, b), start)) in self.matrices.iter().zip(&mixed).enumerate() {
            let update = kf_update(
                StepModel {
                    a,
                    b,
                    c: self.aug.output(),
                    q: self.aug.process_noise(),
                    r: self.aug.measurement_noise(),
                },
                start,
                u_prev,
                y,
            )?;
            log_liks[j] = gaussian_log_pdf(
                &update.innovation,
                &Vector::zeros(update.innovation.len()),
                &update.innovation_cov,
            )?;
            beliefs.push(update.belief);
        }
        let update = mode_posterior_update_log(&self.state.model_probs, &log_liks, &self.chain)?;
        self.state = ImmState {
            beliefs,
            model_probs: update.posterior,
        };
        let estimate = self.state.model_probs.argmax();
        Ok(StepOutput {
            mode: estimate,
            state: Some(self.combined().mean),
            diagnostics: StepDiagnostics {
                posterior: self.state.model_probs.probs().clone(),
                log_likelihoods: log_liks,
                mode: estimate,
                fallback: update.fallback,
            },
        })
    }
}
