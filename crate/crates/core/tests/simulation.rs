mod common;

use common::{all_kinds, noiseless_cstr, scenario};
use ncs_core::cli;
use ncs_core::model::LossStrategy;
use ncs_core::sim::{estimate, generate, run_monte_carlo, simulate_trial, trial_seed};

#[test]
fn trials_are_deterministic() {
    let sc = scenario(&cli::cstr5());
    let a = simulate_trial(&sc, &all_kinds(), 77).unwrap();
    let b = simulate_trial(&sc, &all_kinds(), 77).unwrap();
    assert_eq!(a, b);
    let c = simulate_trial(&sc, &all_kinds(), 78).unwrap();
    assert_ne!(a.truth, c.truth);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let sc = scenario(&cli::cstr5());
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_monte_carlo(&sc, &all_kinds(), 12, 42).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn nearby_base_seeds_give_distinct_trials() {
    let a: Vec<u64> = (0..100).map(|t| trial_seed(1, t)).collect();
    let b: Vec<u64> = (0..100).map(|t| trial_seed(2, t)).collect();
    assert!(a.iter().all(|s| !b.contains(s)));
}

#[test]
fn estimators_see_only_observations() {
    let sc = scenario(&cli::cstr5());
    let record = simulate_trial(&sc, &all_kinds(), 5).unwrap();
    let again = estimate(&sc, &record.observations, &all_kinds());
    assert_eq!(record.estimates, again);
}

#[test]
fn random_streams_are_independent() {
    let base = cli::cstr5();
    let mut sticky = base.clone();
    let link = vec![vec![0.95, 0.05], vec![0.05, 0.95]];
    sticky.chain.links = Some(vec![link.clone(), link]);
    let mut noisier = base.clone();
    noisier.plant.r = vec![vec![1.0, 0.0], vec![0.0, 1.0]];

    let (t0, o0) = generate(&scenario(&base), 13).unwrap();
    let (t1, o1) = generate(&scenario(&sticky), 13).unwrap();
    let (t2, o2) = generate(&scenario(&noisier), 13).unwrap();
    assert_eq!(o0.inputs, o1.inputs);
    assert_ne!(t0.modes, t1.modes);
    assert_eq!(o0.inputs, o2.inputs);
    assert_eq!(t0.modes, t2.modes);
    assert_eq!(t0.states, t2.states);
    assert_ne!(o0.outputs, o2.outputs);
}

#[test]
fn noiseless_lossless_response_is_exact() {
    let mut cfg = noiseless_cstr();
    cfg.plant.r = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
    cfg.chain.links = None;
    cfg.chain.matrix = Some(
        (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
    );
    cfg.initial.mode = cli::ModeSpec::Number(4);
    cfg.initial.x0 = vec![0.3, -0.2];
    let sc = scenario(&cfg);
    let plant = &sc.config().plant;
    let (truth, obs) = generate(&sc, 1).unwrap();

    let mut x = sc.config().x0.clone();
    assert_eq!(obs.y0, plant.c() * &x);
    for (k, u) in obs.inputs.iter().enumerate() {
        x = plant.a() * &x + plant.b() * u;
        assert_eq!(truth.applied[k], *u);
        assert_eq!(truth.states[k].rows(0, 2).into_owned(), x);
        assert_eq!(obs.outputs[k], plant.c() * &x);
    }
}

#[test]
fn zero_strategy_drops_lost_inputs() {
    let mut cfg = cli::cstr5();
    cfg.strategy = LossStrategy::Zero;
    cfg.estimator.held0 = None;
    let sc = scenario(&cfg);
    let (truth, obs) = generate(&sc, 8).unwrap();
    let space = sc.model().space();
    for (k, mode) in truth.modes.iter().enumerate() {
        let alpha = space.decode(*mode).unwrap();
        for i in 0..2 {
            let want = if alpha[i] { obs.inputs[k][i] } else { 0.0 };
            assert_eq!(truth.applied[k][i], want);
        }
    }
}
