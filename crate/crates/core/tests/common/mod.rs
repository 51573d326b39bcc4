#![allow(dead_code)]

use ncs_core::cli::{self, ExperimentConfig};
use ncs_core::filters::{mode_posterior_update, EstimatorKind, ModePosterior};
use ncs_core::linalg::{self, Matrix, Vector};
use ncs_core::markov::TransitionMatrix;
use ncs_core::model::{io_predict, ss_to_arma, AugmentedModel, IoRegressors, LossStrategy, Mode, PlantModel};
use ncs_core::sim::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn m(rows: &[&[f64]]) -> Matrix {
    linalg::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cstr_plant() -> PlantModel {
    cli::cstr5().plant().unwrap()
}

pub fn scenario(cfg: &ExperimentConfig) -> Scenario {
    Scenario::new(cfg.trial_config().unwrap()).unwrap()
}

/// Noise-free reactor run started from a consistent initial condition.
pub fn noiseless_cstr() -> ExperimentConfig {
    let mut cfg = cli::cstr5();
    cfg.plant.r = vec![vec![1e-8, 0.0], vec![0.0, 1e-8]];
    cfg.initial.x0 = vec![0.0, 0.0];
    cfg.initial.held = Some(vec![0.0, 0.0]);
    cfg
}

fn random_stochastic(rng: &mut ChaCha8Rng, s: usize) -> TransitionMatrix {
    let mut p = Matrix::zeros(s, s);
    for i in 0..s {
        let row: Vec<f64> = (0..s).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = row.iter().sum();
        for j in 0..s {
            p[(i, j)] = row[j] / total;
        }
        // absorb rounding so the row sums to one within the validator's tolerance
        let drift: f64 = (0..s).map(|j| p[(i, j)]).sum::<f64>() - 1.0;
        p[(i, s - 1)] -= drift;
    }
    TransitionMatrix::new(p).unwrap()
}

fn random_posterior(rng: &mut ChaCha8Rng, s: usize) -> ModePosterior {
    let w: Vec<f64> = (0..s).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    ModePosterior::new(Vector::from_iterator(s, w.iter().map(|x| x / total))).unwrap()
}

/// Posterior, likelihoods and transition matrix for fuzz case `i`.
pub fn fuzz_case(rng: &mut ChaCha8Rng) -> (ModePosterior, Vector, TransitionMatrix) {
    let s = 1 << rng.random_range(1..=3);
    let prev = random_posterior(rng, s);
    let liks = Vector::from_fn(s, |_, _| 10f64.powf(rng.random_range(-6.0..2.0)));
    (prev, liks, random_stochastic(rng, s))
}

/// `Pr(θ_{k−1} = j | Y_k)` from the joint table `π_i P_ij L_j`, summed without
/// first forming the predicted prior.
pub fn brute_force_posterior(prev: &ModePosterior, liks: &Vector, p: &TransitionMatrix) -> Vector {
    let s = prev.len();
    let mut joint = Matrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            joint[(i, j)] = prev.probs()[i] * p.matrix()[(i, j)] * liks[j];
        }
    }
    let evidence: f64 = joint.iter().sum();
    Vector::from_fn(s, |j, _| joint.column(j).sum() / evidence)
}

/// Largest deviation between the recursion and the brute-force quotient.
pub fn theorem1_max_error(cases: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (prev, liks, p) = fuzz_case(&mut rng);
        let got = mode_posterior_update(&prev, &liks, &p).unwrap();
        assert!(!got.fallback);
        let want = brute_force_posterior(&prev, &liks, &p);
        worst = worst.max((got.posterior.probs() - want).amax());
    }
    worst
}

/// Largest posterior change when every likelihood is multiplied by one constant.
pub fn scale_invariance_max_error(cases: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (prev, liks, p) = fuzz_case(&mut rng);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let a = mode_posterior_update(&prev, &liks, &p).unwrap().posterior;
        let b = mode_posterior_update(&prev, &(&liks * scale), &p).unwrap().posterior;
        assert_eq!(a.argmax(), b.argmax());
        worst = worst.max((a.probs() - b.probs()).amax());
    }
    worst
}

/// Propagates the state-space model and the input-output model side by side
/// from rest over the same modes, inputs and measurement noise, returning the
/// largest output discrepancy.
pub fn io_equivalence_error(strategy: LossStrategy, steps: usize, seed: u64) -> f64 {
    let plant = cstr_plant();
    let arma = ss_to_arma(&plant).unwrap();
    let aug = AugmentedModel::new(plant.clone(), strategy).unwrap();
    let space = *aug.space();
    let (m, r) = (plant.m(), plant.inputs());
    let noise_std = plant.r()[(0, 0)].sqrt();
    let mut rng = rng(seed);

    let mut x = aug.compose_state(&Vector::zeros(plant.n()), &Vector::zeros(r)).unwrap();
    let mut applied = Vector::zeros(r);
    let v0 = Vector::from_fn(m, |_, _| noise_std * rng.sample::<f64, _>(StandardNormal));
    // newest first
    let mut ys = vec![aug.output() * &x + &v0];
    let mut noise = vec![v0];
    let mut us: Vec<Vector> = Vec::new();
    let mut applied_hist: Vec<Vector> = vec![Vector::zeros(r)];
    // modes before the start multiply zero inputs, so any padding works
    let mut modes: Vec<Mode> = vec![space.all_delivered(); arma.input_order()];

    let mut worst = 0.0f64;
    for _ in 0..steps {
        let mode = Mode::from_index(rng.random_range(0..space.size()));
        let u = Vector::from_fn(r, |_, _| 10.0 * rng.sample::<f64, _>(StandardNormal));
        let vk = Vector::from_fn(m, |_, _| noise_std * rng.sample::<f64, _>(StandardNormal));

        applied = ncs_core::model::apply_loss(strategy, &space, mode, &u, &applied).unwrap();
        x = aug.transition(mode).unwrap() * &x + aug.input(mode).unwrap() * &u;
        let y_ss = aug.output() * &x + &vk;

        modes.insert(0, mode);
        us.insert(0, u);
        let mut y_io = io_predict(
            &arma,
            &space,
            strategy,
            IoRegressors {
                outputs: &ys,
                inputs: &us,
                applied: &applied_hist,
                modes: &modes,
            },
        )
        .unwrap();
        y_io += &vk;
        for (c, e) in arma.ma().iter().zip(&noise) {
            y_io.axpy(*c, e, 1.0);
        }
        worst = worst.max((&y_ss - &y_io).amax());

        ys.insert(0, y_ss);
        noise.insert(0, vk);
        applied_hist.insert(0, applied.clone());
    }
    worst
}

pub fn all_kinds() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}
