mod common;

use common::rng;
use trgc::granger::{trgc_analytic, DecisionRule, Flow};
use trgc::scenarios::{
    generate, long_memory_model, random_var, run_experiment, ExperimentConfig, NoiseKind, OrderSelection,
    ScenarioConfig, ScenarioKind,
};
use trgc::time_reversal::mixture_symmetry_check;
use trgc::var::{check_stability, solve_cross_covariances};

fn quick(mut cfg: ScenarioConfig, n_reps: usize) -> ExperimentConfig {
    cfg.n_reps = n_reps;
    cfg.t = 500;
    let mut exp = ExperimentConfig::new(cfg);
    exp.inference.n_boot = 100;
    exp.inference.order = OrderSelection::Fixed(3);
    exp
}

#[test]
fn unidirectional_draws_satisfy_theorem_preconditions() {
    let mut r = rng(61);
    for _ in 0..100 {
        let m = random_var(2, 5, 0.2, |_, i, j| i == j || (i == 1 && j == 0), &mut r).unwrap();
        assert!(check_stability(&m).stable);
        assert!(m.coeffs().iter().all(|a| a[(0, 1)] == 0.0));
        assert!(trgc_analytic(&m).unwrap().d_net >= -1e-10);
    }
}

#[test]
fn zero_sigma_gives_zero_difference() {
    let mut r = rng(62);
    let m = random_var(2, 5, 0.0, |_, _, _| true, &mut r).unwrap();
    assert!(trgc_analytic(&m).unwrap().d_net.abs() < 1e-12);
}

#[test]
fn long_memory_population_difference_is_positive() {
    let m = long_memory_model();
    assert_eq!(m.coeff(1).as_slice(), &[0.95, 1.0, 0.0, 0.5]);
    assert!(trgc_analytic(&m).unwrap().d_net > 0.0);
}

#[test]
fn independent_sources_mixed_stay_symmetric() {
    // population check of the mixing generator's latent structure
    let mut r = rng(63);
    let sources = random_var(2, 5, 0.2, |_, i, j| i == j, &mut r).unwrap();
    let covs = solve_cross_covariances(&sources, 10).unwrap();
    assert!(mixture_symmetry_check(&covs) < 1e-12);
}

#[test]
fn generators_are_deterministic_and_sized() {
    let kinds = [
        (ScenarioKind::NoiselessUnidir, None, 0.0, 1),
        (ScenarioKind::LinearMixing, None, 0.0, 1),
        (ScenarioKind::HiddenCause, None, 0.0, 1),
        (ScenarioKind::AdditiveNoise, Some(NoiseKind::MixedAutocorrelated), 0.5, 1),
        (ScenarioKind::AdditiveNoise, Some(NoiseKind::MixedWhite), 0.5, 1),
        (ScenarioKind::AdditiveNoise, Some(NoiseKind::IndependentWhite), 0.5, 1),
        (ScenarioKind::LongMemory, None, 0.5, 1),
        (ScenarioKind::Downsample, None, 0.0, 3),
        (ScenarioKind::Aggregate, None, 0.0, 4),
    ];
    for (kind, noise, gamma, tau) in kinds {
        let mut cfg = ScenarioConfig::new(kind);
        cfg.t = 300;
        cfg.noise_kind = noise;
        cfg.gamma = gamma;
        cfg.tau = tau;
        let a = generate(&cfg, &mut rng(64)).unwrap();
        let b = generate(&cfg, &mut rng(64)).unwrap();
        assert_eq!(a.series, b.series, "{kind}");
        assert_eq!(a.series.len(), 300, "{kind}");
        assert_eq!(a.series.dim(), 2, "{kind}");
    }
}

#[test]
fn ground_truths() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::AdditiveNoise);
    cfg.noise_kind = Some(NoiseKind::MixedWhite);
    assert_eq!(cfg.ground_truth(), Flow::XToY);
    cfg.gamma = 1.0;
    assert_eq!(cfg.ground_truth(), Flow::None);
    assert_eq!(ScenarioConfig::new(ScenarioKind::HiddenCause).ground_truth(), Flow::None);
    assert_eq!(ScenarioConfig::new(ScenarioKind::LinearMixing).ground_truth(), Flow::None);
    assert_eq!(ScenarioConfig::new(ScenarioKind::Downsample).ground_truth(), Flow::XToY);
}

#[test]
fn pure_noise_counts_any_detection_as_false_positive() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::AdditiveNoise);
    cfg.noise_kind = Some(NoiseKind::MixedAutocorrelated);
    cfg.gamma = 1.0;
    let r = run_experiment(&quick(cfg, 8)).unwrap();
    for t in r.tallies() {
        assert_eq!(t.tp, 0);
        assert!(t.fp <= t.n);
    }
}

#[test]
fn experiments_are_reproducible() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::NoiselessUnidir);
    cfg.seed = 99;
    let exp = quick(cfg, 6);
    let a = run_experiment(&exp).unwrap();
    let b = run_experiment(&exp).unwrap();
    assert_eq!(a, b);
    for t in a.tallies() {
        assert!((0.0..=1.0).contains(&t.tpr) && (0.0..=1.0).contains(&t.fpr));
        if t.method != DecisionRule::StandardGc {
            assert!(t.tp + t.fp <= t.n);
        }
    }
}

#[test]
fn standard_gc_size_counts_both_tests() {
    // two tests at 0.05 each: roughly 0.10 of independent datasets flag something
    let mut cfg = ScenarioConfig::new(ScenarioKind::NoiselessUnidir);
    cfg.interacting = false;
    cfg.n_reps = 100;
    cfg.seed = 4;
    let mut exp = ExperimentConfig::new(cfg);
    exp.methods = vec![DecisionRule::StandardGc];
    exp.inference.order = OrderSelection::Fixed(5);
    let r = run_experiment(&exp).unwrap();
    let fpr = r.tally(DecisionRule::StandardGc, "base").unwrap().fpr;
    assert!((0.06..=0.14).contains(&fpr), "{fpr}");
}

#[test]
fn sweep_emits_one_row_per_method_and_value() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::LongMemory);
    cfg.n_reps = 2;
    let mut exp = quick(cfg, 2);
    exp.sweep = Some(trgc::scenarios::Sweep {
        param: trgc::scenarios::SweepParam::Gamma,
        values: vec![0.0, 0.5, 1.0],
    });
    let r = run_experiment(&exp).unwrap();
    assert_eq!(r.tallies().count(), 3 * exp.methods.len());
    assert!(r.tally(DecisionRule::DiffTrgc, "gamma=0.5").is_some());
    assert_eq!(r.conditions[2].truth, Flow::None);
}

#[test]
fn zero_repetitions_give_empty_tallies() {
    let r = run_experiment(&quick(ScenarioConfig::new(ScenarioKind::LinearMixing), 0)).unwrap();
    assert!(r.conditions[0].seeds.is_empty());
    assert!(r.tallies().all(|t| t.n == 0 && t.tp == 0 && t.fp == 0 && t.fpr == 0.0));
}
