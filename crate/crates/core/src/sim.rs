//! Seeded simulation of a plant behind lossy input links.
//!
//! A trial with seed `σ` draws each random quantity from its own ChaCha8
//! stream, all keyed by `σ`:
//!
//! | stream | draws |
//! |--------|-------|
//! | 0 | initial mode and mode transitions |
//! | 1 | excitation inputs `u_k` |
//! | 2 | measurement noise `v_k` |
//! | 3 | process noise `w_k` |
//! | 4 | initial-state perturbation (only when `x0_std > 0`) |
//!
//! Trial `t` of a Monte Carlo run uses `σ = mix64(base_seed) ^ t`, see
//! [`trial_seed`].
//!
//! Truth and estimation are separated: [`generate`] produces the hidden
//! [`Truth`] and the public [`Observations`], and [`estimate`] sees only the
//! latter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::{
    Alg1, Alg2, Estimator, EstimatorKind, GaussianBelief, Imm, KalmanContext, ModePosterior,
    StepDiagnostics,
};
use crate::linalg::{Matrix, Vector};
use crate::markov::{sample_from, sample_next, TransitionMatrix};
use crate::model::{apply_loss, ss_to_arma, ArmaModel, AugmentedModel, LossStrategy, Mode, PlantModel};

const MODE_STREAM: u64 = 0;
const INPUT_STREAM: u64 = 1;
const MEASUREMENT_STREAM: u64 = 2;
const PROCESS_STREAM: u64 = 3;
const INITIAL_STATE_STREAM: u64 = 4;

/// How the controller excites the plant.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    /// Independent zero-mean Gaussian inputs with the given per-channel std.
    WhiteNoise { std: Vec<f64> },
    /// Fixed inputs `u_0, u_1, …`; needs at least `steps` entries.
    Sequence(Vec<Vector>),
}

/// Distribution of the mode active during the first transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialMode {
    Stationary,
    Fixed(Mode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorInit {
    /// `x̂_{0|0}` over the model state (plant state, then held inputs for `Hold`)
    pub mean: Vector,
    pub cov: Matrix,
    pub prior: ModePosterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub plant: PlantModel,
    /// Input-output model for Algorithm 1; derived from the plant when absent.
    pub arma: Option<ArmaModel>,
    pub strategy: LossStrategy,
    pub chain: TransitionMatrix,
    pub steps: usize,
    pub input: InputSpec,
    /// True initial plant state.
    pub x0: Vector,
    /// True initial actuator memory `û_{−1}` (hold strategy).
    pub held0: Vector,
    /// Per-trial Gaussian perturbation of `x0`; zero keeps it fixed.
    pub x0_std: f64,
    pub initial_mode: InitialMode,
    pub init: EstimatorInit,
}

/// Validated trial configuration with its derived models.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: TrialConfig,
    aug: AugmentedModel,
    arma: Option<ArmaModel>,
    measurement_factor: Matrix,
    process_factor: Matrix,
    initial_modes: Vector,
}

impl Scenario {
    pub fn new(cfg: TrialConfig) -> Result<Self> {
        let plant = &cfg.plant;
        let (n, r) = (plant.n(), plant.inputs());
        if cfg.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        let aug = AugmentedModel::new(plant.clone(), cfg.strategy)?;
        let s = aug.space().size();
        if cfg.chain.size() != s {
            return Err(Error::config(
                "chain",
                format!("expected {s}×{s} for {r} links, got {0}×{0}", cfg.chain.size()),
            ));
        }
        match &cfg.input {
            InputSpec::WhiteNoise { std } => {
                if std.len() != r {
                    return Err(Error::config("input.std", format!("expected {r} entries, got {}", std.len())));
                }
                if std.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::config("input.std", "must be finite and nonnegative"));
                }
            }
            InputSpec::Sequence(seq) => {
                if seq.len() < cfg.steps {
                    return Err(Error::config(
                        "input.sequence",
                        format!("needs {} entries, got {}", cfg.steps, seq.len()),
                    ));
                }
                if seq.iter().any(|u| u.len() != r) {
                    return Err(Error::config("input.sequence", format!("every entry needs {r} values")));
                }
            }
        }
        if cfg.x0.len() != n {
            return Err(Error::config("initial.x0", format!("expected {n} entries, got {}", cfg.x0.len())));
        }
        if cfg.held0.len() != r {
            return Err(Error::config("initial.held", format!("expected {r} entries, got {}", cfg.held0.len())));
        }
        if !(cfg.x0_std.is_finite() && cfg.x0_std >= 0.0) {
            return Err(Error::config("initial.x0_std", "must be finite and nonnegative"));
        }
        let dim = aug.state_dim();
        if cfg.init.mean.len() != dim {
            return Err(Error::config(
                "estimator.xhat0",
                format!("expected {dim} entries for the {} strategy, got {}", cfg.strategy, cfg.init.mean.len()),
            ));
        }
        GaussianBelief::new(cfg.init.mean.clone(), cfg.init.cov.clone())
            .map_err(|e| Error::config("estimator.p0", e.to_string()))?;
        if cfg.init.prior.len() != s {
            return Err(Error::config("estimator.mode_prior", format!("expected {s} entries")));
        }
        let initial_modes = match cfg.initial_mode {
            InitialMode::Stationary => cfg.chain.stationary(),
            InitialMode::Fixed(mode) => {
                aug.space()
                    .check(mode)
                    .map_err(|e| Error::config("initial.mode", e.to_string()))?;
                let mut v = Vector::zeros(s);
                v[mode.index()] = 1.0;
                v
            }
        };
        let arma = match &cfg.arma {
            Some(arma) => {
                if arma.outputs() != plant.m() || arma.inputs() != r {
                    return Err(Error::config("arma", "dimensions do not match the plant"));
                }
                Some(arma.clone())
            }
            None => ss_to_arma(plant).ok(),
        };
        let measurement_factor = match crate::linalg::cholesky(plant.r(), "R") {
            Ok(chol) => chol.l(),
            Err(_) => psd_factor(plant.r()),
        };
        let process_factor = psd_factor(plant.q());
        Ok(Self {
            aug,
            arma,
            measurement_factor,
            process_factor,
            initial_modes,
            cfg,
        })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.cfg
    }

    pub fn model(&self) -> &AugmentedModel {
        &self.aug
    }

    /// Input-output model used by Algorithm 1, if one is available.
    pub fn arma(&self) -> Option<&ArmaModel> {
        self.arma.as_ref()
    }

    /// Fresh estimator at its configured initial condition. Algorithm 1 also
    /// takes `y_0` into its output history.
    pub fn build(&self, kind: EstimatorKind, y0: &Vector) -> Result<Box<dyn Estimator>> {
        let init = &self.cfg.init;
        let belief = GaussianBelief::new(init.mean.clone(), init.cov.clone())?;
        Ok(match kind {
            EstimatorKind::Alg1 => {
                let mut alg1 = self.alg1()?;
                alg1.prime_output(y0)?;
                Box::new(alg1)
            }
            EstimatorKind::Alg2 => Box::new(Alg2::new(
                self.aug.clone(),
                self.cfg.chain.clone(),
                belief,
                init.prior.clone(),
            )?),
            EstimatorKind::Imm => Box::new(Imm::new(
                self.aug.clone(),
                self.cfg.chain.clone(),
                belief,
                init.prior.clone(),
            )?),
        })
    }
}

impl Scenario {
    fn alg1(&self) -> Result<Alg1> {
        let cfg = &self.cfg;
        let arma = self.arma.clone().ok_or_else(|| {
            Error::UnsupportedConversion(
                "Algorithm 1 needs an input-output model; supply `arma` in the config".into(),
            )
        })?;
        let (n, r) = (cfg.plant.n(), cfg.plant.inputs());
        let held = match cfg.strategy {
            LossStrategy::Zero => Vector::zeros(r),
            LossStrategy::Hold => cfg.init.mean.rows(n, r).into_owned(),
        };
        Alg1::new(
            arma,
            cfg.strategy,
            cfg.chain.clone(),
            cfg.init.prior.clone(),
            held,
            Some(KalmanContext {
                model: self.aug.clone(),
                belief: GaussianBelief::new(cfg.init.mean.clone(), cfg.init.cov.clone())?,
            }),
        )
    }
}

/// `F` with `F Fᵀ = Q` for a PSD `Q`.
fn psd_factor(q: &Matrix) -> Matrix {
    let eig = q.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * Matrix::from_diagonal(&roots)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

/// Hidden quantities of a trial; row `k − 1` describes step `k = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    /// `θ_{k−1}`, the mode of the transition into `x_k`
    pub modes: Vec<Mode>,
    /// `x_k` over the model state
    pub states: Vec<Vector>,
    /// `û_{k−1}` as applied by the actuator
    pub applied: Vec<Vector>,
    /// initial model state
    pub x0: Vector,
}

/// What the estimators are allowed to see.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    /// `y_0`, measured before the first input
    pub y0: Vector,
    /// `u_{k−1}` for `k = 1..=N`
    pub inputs: Vec<Vector>,
    /// `y_k` for `k = 1..=N`
    pub outputs: Vec<Vector>,
}

/// Draws one realization of the closed-loop plant.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<(Truth, Observations)> {
    let cfg = &scenario.cfg;
    let aug = &scenario.aug;
    let (n, m, r) = (cfg.plant.n(), cfg.plant.m(), cfg.plant.inputs());
    let mut mode_rng = stream(seed, MODE_STREAM);
    let mut input_rng = stream(seed, INPUT_STREAM);
    let mut meas_rng = stream(seed, MEASUREMENT_STREAM);
    let mut proc_rng = stream(seed, PROCESS_STREAM);

    let mut x_plant = cfg.x0.clone();
    if cfg.x0_std > 0.0 {
        let mut rng = stream(seed, INITIAL_STATE_STREAM);
        x_plant += normals(&mut rng, n) * cfg.x0_std;
    }
    let mut x = aug.compose_state(&x_plant, &cfg.held0)?;
    let x0 = x.clone();
    let mut held = cfg.held0.clone();
    let y0 = aug.output() * &x + &scenario.measurement_factor * normals(&mut meas_rng, m);

    let mut truth = Truth {
        modes: Vec::with_capacity(cfg.steps),
        states: Vec::with_capacity(cfg.steps),
        applied: Vec::with_capacity(cfg.steps),
        x0,
    };
    let mut obs = Observations {
        y0,
        inputs: Vec::with_capacity(cfg.steps),
        outputs: Vec::with_capacity(cfg.steps),
    };
    let mut mode = sample_from(scenario.initial_modes.iter().copied(), &mut mode_rng);
    for k in 1..=cfg.steps {
        if k > 1 {
            mode = sample_next(&cfg.chain, mode, &mut mode_rng);
        }
        let u = match &cfg.input {
            InputSpec::WhiteNoise { std } => {
                Vector::from_fn(r, |i, _| {
                    let z: f64 = StandardNormal.sample(&mut input_rng);
                    std[i] * z
                })
            }
            InputSpec::Sequence(seq) => seq[k - 1].clone(),
        };
        held = apply_loss(cfg.strategy, aug.space(), mode, &u, &held)?;
        let w = &scenario.process_factor * normals(&mut proc_rng, n);
        let w = aug.compose_state(&w, &Vector::zeros(r))?;
        x = aug.transition(mode)? * &x + aug.input(mode)? * &u + w;
        let y = aug.output() * &x + &scenario.measurement_factor * normals(&mut meas_rng, m);

        truth.modes.push(mode);
        truth.states.push(x.clone());
        truth.applied.push(held.clone());
        obs.inputs.push(u);
        obs.outputs.push(y);
    }
    Ok((truth, obs))
}

/// An estimator stopped by a numerical failure at step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub step: usize,
    pub message: String,
}

/// Per-step outputs of one estimator; shorter than the trial when it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTrace {
    pub kind: EstimatorKind,
    /// `θ̂_{k−1}`
    pub modes: Vec<Mode>,
    /// `x̂_{k|k}` over the model state
    pub states: Vec<Option<Vector>>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub failure: Option<TrialFailure>,
}

impl EstimatorTrace {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn fallback_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.fallback).count()
    }
}

/// Runs the selected estimators in lockstep over the observations.
pub fn estimate(scenario: &Scenario, obs: &Observations, estimators: &[EstimatorKind]) -> Vec<EstimatorTrace> {
    estimators
        .iter()
        .map(|&kind| {
            let mut trace = EstimatorTrace {
                kind,
                modes: Vec::with_capacity(obs.outputs.len()),
                states: Vec::with_capacity(obs.outputs.len()),
                diagnostics: Vec::with_capacity(obs.outputs.len()),
                failure: None,
            };
            let mut estimator = match scenario.build(kind, &obs.y0) {
                Ok(e) => e,
                Err(e) => {
                    trace.failure = Some(TrialFailure { step: 0, message: e.to_string() });
                    return trace;
                }
            };
            for (k, (u, y)) in obs.inputs.iter().zip(&obs.outputs).enumerate() {
                match estimator.step(u, y) {
                    Ok(out) => {
                        trace.modes.push(out.mode);
                        trace.states.push(out.state);
                        trace.diagnostics.push(out.diagnostics);
                    }
                    Err(e) => {
                        trace.failure = Some(TrialFailure { step: k + 1, message: e.to_string() });
                        break;
                    }
                }
            }
            trace
        })
        .collect()
}

/// Complete log of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    /// Physical state dimension `n`; model states may carry held inputs after it.
    pub plant_dim: usize,
    pub truth: Truth,
    pub observations: Observations,
    pub estimates: Vec<EstimatorTrace>,
}

impl TrialRecord {
    pub fn steps(&self) -> usize {
        self.observations.outputs.len()
    }

    pub fn trace(&self, kind: EstimatorKind) -> Option<&EstimatorTrace> {
        self.estimates.iter().find(|t| t.kind == kind)
    }

    pub fn failed(&self) -> bool {
        self.estimates.iter().any(EstimatorTrace::failed)
    }
}

pub fn simulate_trial(scenario: &Scenario, estimators: &[EstimatorKind], seed: u64) -> Result<TrialRecord> {
    let (truth, observations) = generate(scenario, seed)?;
    let estimates = estimate(scenario, &observations, estimators);
    Ok(TrialRecord {
        seed,
        plant_dim: scenario.cfg.plant.n(),
        truth,
        observations,
        estimates,
    })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t`. The base is scrambled first so that nearby base seeds
/// do not share trial seeds (with a bare XOR, bases 0..127 all map onto the
/// same 100 trial seeds).
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    mix64(base_seed) ^ trial as u64
}

/// Outcome of a Monte Carlo run, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub records: Vec<TrialRecord>,
    /// Trials in which at least one estimator failed.
    pub failed_trials: usize,
}

/// Runs `n_trials` independent trials in parallel; results do not depend on
/// the thread count.
pub fn run_monte_carlo(
    scenario: &Scenario,
    estimators: &[EstimatorKind],
    n_trials: usize,
    base_seed: u64,
) -> Result<MonteCarloRun> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let records = (0..n_trials)
        .into_par_iter()
        .map(|t| simulate_trial(scenario, estimators, trial_seed(base_seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let failed_trials = records.iter().filter(|r| r.failed()).count();
    Ok(MonteCarloRun { records, failed_trials })
}
