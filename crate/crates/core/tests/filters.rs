mod common;

use common::{noiseless_cstr, rng, scenario};
use ncs_core::cli;
use ncs_core::filters::{kf_step, Alg2, Estimator, EstimatorKind, GaussianBelief, Imm, ModePosterior, StepModel};
use ncs_core::linalg::{self, Matrix, Vector};
use ncs_core::markov::TransitionMatrix;
use ncs_core::metrics::rmse;
use ncs_core::model::{AugmentedModel, LossStrategy, Mode};
use ncs_core::sim::{generate, InitialMode, Scenario};
use rand::Rng;

fn assert_healthy(cov: &Matrix, what: &str) {
    assert!(linalg::max_asymmetry(cov) <= 1e-10, "{what}: asymmetric");
    assert!(linalg::min_eigenvalue(cov) >= -1e-9, "{what}: min eigenvalue {}", linalg::min_eigenvalue(cov));
}

fn initial_belief(s: &Scenario) -> GaussianBelief {
    let init = &s.config().init;
    GaussianBelief::new(init.mean.clone(), init.cov.clone()).unwrap()
}

#[test]
fn covariances_stay_symmetric_psd() {
    for strategy in [LossStrategy::Zero, LossStrategy::Hold] {
        let mut cfg = cli::cstr5();
        cfg.strategy = strategy;
        cfg.estimator.held0 = None;
        let sc = scenario(&cfg);
        for seed in 0..20 {
            let (_, obs) = generate(&sc, seed).unwrap();
            let aug = sc.model().clone();
            let chain = sc.config().chain.clone();
            let prior = sc.config().init.prior.clone();
            let mut alg2 = Alg2::new(aug.clone(), chain.clone(), initial_belief(&sc), prior.clone()).unwrap();
            let mut imm = Imm::new(aug, chain, initial_belief(&sc), prior).unwrap();
            for (u, y) in obs.inputs.iter().zip(&obs.outputs) {
                alg2.step(u, y).unwrap();
                imm.step(u, y).unwrap();
                assert_healthy(&alg2.state().belief.cov, "alg2");
                for b in &imm.state().beliefs {
                    assert_healthy(&b.cov, "imm");
                }
                assert_healthy(&imm.combined().cov, "imm combined");
            }
        }
    }
}

#[test]
fn alg1_state_filter_covariance_is_healthy() {
    use ncs_core::filters::{Alg1, KalmanContext};
    use ncs_core::model::ss_to_arma;
    let cfg = cli::cstr5();
    let sc = scenario(&cfg);
    let (_, obs) = generate(&sc, 9).unwrap();
    let init = &sc.config().init;
    let mut alg1 = Alg1::new(
        ss_to_arma(&sc.config().plant).unwrap(),
        LossStrategy::Hold,
        sc.config().chain.clone(),
        init.prior.clone(),
        Vector::zeros(2),
        Some(KalmanContext { model: sc.model().clone(), belief: initial_belief(&sc) }),
    )
    .unwrap();
    alg1.prime_output(&obs.y0).unwrap();
    for (u, y) in obs.inputs.iter().zip(&obs.outputs) {
        alg1.step(u, y).unwrap();
        assert_healthy(&alg1.belief().unwrap().cov, "alg1");
    }
}

fn kf_reference(aug: &AugmentedModel, belief: GaussianBelief, modes: &[Mode], inputs: &[Vector], outputs: &[Vector]) -> Vec<Vector> {
    let mut b = belief;
    modes
        .iter()
        .zip(inputs.iter().zip(outputs))
        .map(|(&mode, (u, y))| {
            let (a, bm) = (aug.transition(mode).unwrap(), aug.input(mode).unwrap());
            let model = StepModel {
                a: &a,
                b: &bm,
                c: aug.output(),
                q: aug.process_noise(),
                r: aug.measurement_noise(),
            };
            b = kf_step(model, &b, u, y).unwrap();
            b.mean.clone()
        })
        .collect()
}

#[test]
fn known_mode_alg2_is_a_kalman_filter() {
    let sc = scenario(&cli::cstr5());
    let (truth, obs) = generate(&sc, 4).unwrap();
    let want = kf_reference(sc.model(), initial_belief(&sc), &truth.modes, &obs.inputs, &obs.outputs);
    let mut alg2 = Alg2::new(
        sc.model().clone(),
        sc.config().chain.clone(),
        initial_belief(&sc),
        sc.config().init.prior.clone(),
    )
    .unwrap();
    for (k, (&mode, (u, y))) in truth.modes.iter().zip(obs.inputs.iter().zip(&obs.outputs)).enumerate() {
        let got = alg2.step_with_known_mode(mode, u, y).unwrap();
        assert!((got - &want[k]).amax() < 1e-12, "step {k}");
        assert_eq!(alg2.state().posterior.argmax(), mode);
    }
}

/// Scenario where every packet arrives and the estimators know it.
fn lossless() -> Scenario {
    let mut cfg = cli::cstr5();
    cfg.chain.links = None;
    cfg.chain.matrix = Some(
        (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
    );
    cfg.initial.mode = cli::ModeSpec::Number(4);
    cfg.estimator.mode_prior = Some(vec![0.0, 0.0, 0.0, 1.0]);
    scenario(&cfg)
}

#[test]
fn single_mode_estimators_reduce_to_the_kalman_filter() {
    let sc = lossless();
    assert_eq!(sc.config().initial_mode, InitialMode::Fixed(sc.model().space().all_delivered()));
    let (truth, obs) = generate(&sc, 21).unwrap();
    assert!(truth.modes.iter().all(|&m| m == sc.model().space().all_delivered()));
    let want = kf_reference(sc.model(), initial_belief(&sc), &truth.modes, &obs.inputs, &obs.outputs);
    for kind in [EstimatorKind::Alg2, EstimatorKind::Imm] {
        let mut est = sc.build(kind, &obs.y0).unwrap();
        for (k, (u, y)) in obs.inputs.iter().zip(&obs.outputs).enumerate() {
            let out = est.step(u, y).unwrap();
            assert_eq!(out.mode, sc.model().space().all_delivered(), "{kind} step {k}");
            assert!((out.state.unwrap() - &want[k]).amax() < 1e-9, "{kind} step {k}");
        }
    }
}

#[test]
fn imm_with_point_mass_and_identity_chain_tracks_that_mode() {
    let sc = scenario(&cli::cstr5());
    let (_, obs) = generate(&sc, 2).unwrap();
    let mode = Mode::from_index(1);
    let modes = vec![mode; obs.inputs.len()];
    let want = kf_reference(sc.model(), initial_belief(&sc), &modes, &obs.inputs, &obs.outputs);
    let mut imm = Imm::new(
        sc.model().clone(),
        TransitionMatrix::identity(4),
        initial_belief(&sc),
        ModePosterior::point_mass(4, mode),
    )
    .unwrap();
    for (k, (u, y)) in obs.inputs.iter().zip(&obs.outputs).enumerate() {
        let out = imm.step(u, y).unwrap();
        assert!((out.state.unwrap() - &want[k]).amax() < 1e-9, "step {k}");
    }
}

#[test]
fn known_mode_kalman_filter_is_accurate_on_the_reactor() {
    let mut cfg = noiseless_cstr();
    cfg.plant.r = cli::cstr5().plant.r;
    let sc = scenario(&cfg);
    let mut worst = 0.0f64;
    let mut r = rng(0);
    for _ in 0..20 {
        let (truth, obs) = generate(&sc, r.random()).unwrap();
        let est = kf_reference(sc.model(), initial_belief(&sc), &truth.modes, &obs.inputs, &obs.outputs);
        for i in 0..2 {
            worst = worst.max(rmse(&truth.states, &est, i).unwrap());
        }
    }
    assert!(worst < 0.05, "{worst}");
}
