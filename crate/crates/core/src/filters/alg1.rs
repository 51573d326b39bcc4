//! Mode estimation from the input-output model.
//!
//! The output predicted under candidate mode `j` comes from the ARMA
//! recursion with `θ_{k−1} = j` and the older modes replaced by their own
//! estimates. The prediction covariance `(1 + Σ c_m²) Λ` is constant, so the
//! mode can be tracked without any state filter. A Kalman filter driven by the
//! estimated mode is optional.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::markov::{ModePosterior, TransitionMatrix};
use crate::model::{io_predict, ArmaModel, AugmentedModel, IoRegressors, LossStrategy, Mode, ModeSpace};

use super::gaussian::gaussian_log_pdf;
use super::kalman::{kf_step, GaussianBelief, StepModel};
use super::posterior::mode_posterior_update_log;
use super::{Estimator, EstimatorKind, StepDiagnostics, StepOutput};

/// `Σ = (1 + c_1² + … + c_h²) Λ`.
pub fn alg1_const_sigma(arma: &ArmaModel) -> Matrix {
    let gain = 1.0 + arma.ma().iter().map(|c| c * c).sum::<f64>();
    arma.lambda() * gain
}

/// History buffers, most recent first.
#[derive(Debug, Clone)]
pub struct Alg1State {
    /// `y_{k−1} .. y_{k−n}`
    pub y_hist: VecDeque<Vector>,
    /// `u_{k−1} .. u_{k−p}` once the current input has been pushed
    pub u_hist: VecDeque<Vector>,
    /// reconstructed applied inputs `û̂_{k−2} .. û̂_{k−p−1}` (hold strategy)
    pub uhat_hist: VecDeque<Vector>,
    /// `θ̂_{k−2} .. θ̂_{k−p}`
    pub mode_hist: VecDeque<Mode>,
    pub posterior: ModePosterior,
    pub const_sigma: Matrix,
}

fn push_bounded<T>(buf: &mut VecDeque<T>, depth: usize, value: T) {
    if depth == 0 {
        return;
    }
    buf.push_front(value);
    buf.truncate(depth);
}

/// Optional state filter run with the estimated mode.
#[derive(Debug, Clone)]
pub struct KalmanContext {
    pub model: AugmentedModel,
    pub belief: GaussianBelief,
}

#[derive(Debug, Clone)]
pub struct Alg1 {
    arma: ArmaModel,
    strategy: LossStrategy,
    space: ModeSpace,
    chain: TransitionMatrix,
    state: Alg1State,
    kf: Option<KalmanContext>,
}

impl Alg1 {
    /// Zero-padded histories; past mode estimates start at "all delivered".
    /// `initial_applied` seeds `û̂_{−1}` for the hold strategy.
    pub fn new(
        arma: ArmaModel,
        strategy: LossStrategy,
        chain: TransitionMatrix,
        prior: ModePosterior,
        initial_applied: Vector,
        kf: Option<KalmanContext>,
    ) -> Result<Self> {
        let space = ModeSpace::new(arma.inputs())?;
        if chain.size() != space.size() {
            return Err(Error::dim("transition matrix", space.size(), chain.size()));
        }
        if prior.len() != space.size() {
            return Err(Error::dim("mode prior", space.size(), prior.len()));
        }
        let (m, r) = (arma.outputs(), arma.inputs());
        if initial_applied.len() != r {
            return Err(Error::dim("initial applied input", r, initial_applied.len()));
        }
        if let Some(ctx) = &kf {
            if ctx.model.strategy() != strategy || ctx.model.space() != &space {
                return Err(Error::Domain(
                    "Kalman context must share the loss strategy and links".into(),
                ));
            }
            if ctx.belief.dim() != ctx.model.state_dim() {
                return Err(Error::dim("initial belief", ctx.model.state_dim(), ctx.belief.dim()));
            }
            if ctx.model.base().m() != m {
                return Err(Error::dim("Kalman context outputs", m, ctx.model.base().m()));
            }
        }
        let p = arma.input_order();
        let mut uhat_hist = VecDeque::from(vec![Vector::zeros(r); p]);
        if let Some(first) = uhat_hist.front_mut() {
            *first = initial_applied;
        }
        let state = Alg1State {
            y_hist: VecDeque::from(vec![Vector::zeros(m); arma.ar_order()]),
            u_hist: VecDeque::from(vec![Vector::zeros(r); p]),
            uhat_hist,
            mode_hist: VecDeque::from(vec![space.all_delivered(); p.saturating_sub(1)]),
            posterior: prior,
            const_sigma: alg1_const_sigma(&arma),
        };
        Ok(Self {
            arma,
            strategy,
            space,
            chain,
            state,
            kf,
        })
    }

    pub fn state(&self) -> &Alg1State {
        &self.state
    }

    pub fn belief(&self) -> Option<&GaussianBelief> {
        self.kf.as_ref().map(|ctx| &ctx.belief)
    }

    /// Feeds the measurement taken before the first input (`y_0`) into the
    /// output history.
    pub fn prime_output(&mut self, y0: &Vector) -> Result<()> {
        if y0.len() != self.arma.outputs() {
            return Err(Error::dim("y_0", self.arma.outputs(), y0.len()));
        }
        push_bounded(&mut self.state.y_hist, self.arma.ar_order(), y0.clone());
        Ok(())
    }

    /// `ŷ_{j,k}` from the current buffers; `u_hist` must already hold `u_{k−1}`.
    pub fn predict_output(&self, candidate: Mode) -> Result<Vector> {
        let candidate = self.space.check(candidate)?;
        let modes: Vec<Mode> = std::iter::once(candidate)
            .chain(self.state.mode_hist.iter().copied())
            .collect();
        let outputs: Vec<Vector> = self.state.y_hist.iter().cloned().collect();
        let inputs: Vec<Vector> = self.state.u_hist.iter().cloned().collect();
        let applied: Vec<Vector> = self.state.uhat_hist.iter().cloned().collect();
        io_predict(
            &self.arma,
            &self.space,
            self.strategy,
            IoRegressors {
                outputs: &outputs,
                inputs: &inputs,
                applied: &applied,
                modes: &modes,
            },
        )
    }
}

impl Estimator for Alg1 {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Alg1
    }

    fn step(&mut self, u_prev: &Vector, y: &Vector) -> Result<StepOutput> {
        let (m, r, p) = (self.arma.outputs(), self.arma.inputs(), self.arma.input_order());
        if u_prev.len() != r {
            return Err(Error::dim("u", r, u_prev.len()));
        }
        if y.len() != m {
            return Err(Error::dim("y", m, y.len()));
        }
        push_bounded(&mut self.state.u_hist, p, u_prev.clone());

        let s = self.space.size();
        let mut log_liks = Vector::zeros(s);
        for mode in self.space.modes() {
            let yhat = self.predict_output(mode)?;
            log_liks[mode.index()] = gaussian_log_pdf(y, &yhat, &self.state.const_sigma)?;
        }
        let update = mode_posterior_update_log(&self.state.posterior, &log_liks, &self.chain)?;
        let estimate = update.posterior.argmax();

        // û̂_{k−1} = Γ(θ̂_{k−1}) u_{k−1} + (I − Γ(θ̂_{k−1})) û̂_{k−2}
        if self.strategy == LossStrategy::Hold {
            let gamma = self.space.gamma(estimate)?;
            let older = self.state.uhat_hist.front().cloned().unwrap_or_else(|| Vector::zeros(r));
            let applied = &gamma * u_prev + (Matrix::identity(r, r) - &gamma) * older;
            push_bounded(&mut self.state.uhat_hist, p, applied);
        }
        push_bounded(&mut self.state.y_hist, self.arma.ar_order(), y.clone());
        push_bounded(&mut self.state.mode_hist, p.saturating_sub(1), estimate);
        self.state.posterior = update.posterior;

        let state = match &mut self.kf {
            Some(ctx) => {
                let a = ctx.model.transition(estimate)?;
                let b = ctx.model.input(estimate)?;
                ctx.belief = kf_step(
                    StepModel {
                        a: &a,
                        b: &b,
                        c: ctx.model.output(),
                        q: ctx.model.process_noise(),
                        r: ctx.model.measurement_noise(),
                    },
                    &ctx.belief,
                    u_prev,
                    y,
                )?;
                Some(ctx.belief.mean.clone())
            }
            None => None,
        };

        Ok(StepOutput {
            mode: estimate,
            state,
            diagnostics: StepDiagnostics {
                posterior: self.state.posterior.probs().clone(),
                log_likelihoods: log_liks,
                mode: estimate,
                fallback: update.fallback,
            },
        })
    }
}
