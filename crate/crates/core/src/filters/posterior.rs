//! Recursive mode posterior `Pr(θ_{k−1} = j | Y_k) ∝ p(y_k | θ_{k−1} = j, Y_{k−1}) · E_j`.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::markov::{predict_prior, ModePosterior, TransitionMatrix};
use crate::model::Mode;

/// Outcome of one posterior update.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorUpdate {
    pub posterior: ModePosterior,
    /// Every weighted likelihood vanished; the posterior is the predicted prior.
    pub fallback: bool,
}

/// Posterior update from log-likelihoods, normalized with max-subtraction.
pub fn mode_posterior_update_log(
    prev: &ModePosterior,
    log_likelihoods: &Vector,
    p: &TransitionMatrix,
) -> Result<PosteriorUpdate> {
    let prior = predict_prior(prev, p)?;
    if log_likelihoods.len() != prior.len() {
        return Err(Error::dim("likelihood vector", prior.len(), log_likelihoods.len()));
    }
    if log_likelihoods.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
        return Err(Error::Numerical("log-likelihoods must be < +∞ and not NaN".into()));
    }
    let log_weights = Vector::from_fn(prior.len(), |j, _| {
        if prior[j] > 0.0 {
            log_likelihoods[j] + prior[j].ln()
        } else {
            f64::NEG_INFINITY
        }
    });
    let top = log_weights.max();
    if top == f64::NEG_INFINITY {
        return Ok(PosteriorUpdate {
            posterior: ModePosterior::from_weights(prior),
            fallback: true,
        });
    }
    Ok(PosteriorUpdate {
        posterior: ModePosterior::from_weights(log_weights.map(|w| (w - top).exp())),
        fallback: false,
    })
}

/// Posterior update from likelihood densities.
pub fn mode_posterior_update(
    prev: &ModePosterior,
    likelihoods: &Vector,
    p: &TransitionMatrix,
) -> Result<PosteriorUpdate> {
    if likelihoods.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::Domain("likelihoods must be finite and nonnegative".into()));
    }
    mode_posterior_update_log(prev, &likelihoods.map(f64::ln), p)
}

/// `argmax_j Pr(θ_{k−1} = j | Y_k)`, lowest index on ties.
pub fn mode_argmax(posterior: &ModePosterior) -> Mode {
    posterior.argmax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn chain() -> TransitionMatrix {
        TransitionMatrix::new(Matrix::from_row_slice(
            3,
            3,
            &[0.7, 0.2, 0.1, 0.3, 0.3, 0.4, 0.0, 0.5, 0.5],
        ))
        .unwrap()
    }

    #[test]
    fn equal_likelihoods_give_prior() {
        let prev = ModePosterior::new(Vector::from_column_slice(&[0.2, 0.5, 0.3])).unwrap();
        let out =
            mode_posterior_update(&prev, &Vector::from_element(3, 0.37), &chain()).unwrap();
        let prior = predict_prior(&prev, &chain()).unwrap();
        assert!((out.posterior.probs() - prior).amax() < 1e-15);
        assert!(!out.fallback);
    }

    #[test]
    fn single_mode() {
        let p = TransitionMatrix::identity(1);
        let out =
            mode_posterior_update(&ModePosterior::uniform(1), &Vector::from_element(1, 1e-3), &p)
                .unwrap();
        assert_eq!(out.posterior.probs()[0], 1.0);
    }

    #[test]
    fn underflow_falls_back_to_prior() {
        let prev = ModePosterior::uniform(3);
        let out = mode_posterior_update(&prev, &Vector::zeros(3), &chain()).unwrap();
        assert!(out.fallback);
        assert_eq!(out.posterior.probs(), &predict_prior(&prev, &chain()).unwrap());
        // log domain survives densities far below f64::MIN_POSITIVE
        let logs = Vector::from_column_slice(&[-2000.0, -2001.0, -5000.0]);
        let out = mode_posterior_update_log(&prev, &logs, &chain()).unwrap();
        assert!(!out.fallback);
        assert_eq!(out.posterior.argmax(), Mode::from_index(0));
    }

    #[test]
    fn argmax_tie_breaking() {
        let p = |xs: &[f64]| ModePosterior::new(Vector::from_column_slice(xs)).unwrap();
        assert_eq!(mode_argmax(&p(&[0.1, 0.7, 0.1, 0.1])).number(), 2);
        assert_eq!(mode_argmax(&p(&[0.25; 4])).number(), 1);
        assert_eq!(mode_argmax(&p(&[0.5, 0.5, 0.0, 0.0])).number(), 1);
    }

    #[test]
    fn rejects_bad_likelihoods() {
        let prev = ModePosterior::uniform(3);
        assert!(mode_posterior_update(&prev, &Vector::from_element(3, -1.0), &chain()).is_err());
        assert!(mode_posterior_update(&prev, &Vector::from_element(2, 1.0), &chain()).is_err());
    }
}
