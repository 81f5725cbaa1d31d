mod common;

use common::{m2, random_general, random_lower_triangular, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use trgc::granger::{granger_scores, trgc_analytic, trgc_from_series, RestrictedSource};
use trgc::inference::{bootstrap, f_test_gc, BootstrapSpec};
use trgc::granger::{decide, DecisionRule, Significance};
use trgc::scenarios::random_var;
use trgc::var::{simulate, Direction, VarModel};

#[test]
fn independent_channels_have_small_scores() {
    let mut r = rng(31);
    let m = random_var(2, 5, 0.2, |_, i, j| i == j, &mut r).unwrap();
    let ts = simulate(&m, 20_000, &mut r, 100).unwrap();
    let s = granger_scores(&ts, 5, Direction::Forward).unwrap();
    assert!(s.f_xy < 0.01 && s.f_yx < 0.01, "{s:?}");
}

#[test]
fn strong_coupling_dominates() {
    let m = VarModel::new(vec![m2([0.5, 0.0, 0.8, 0.3])], DMatrix::identity(2, 2)).unwrap();
    let ts = simulate(&m, 2000, &mut rng(32), 50).unwrap();
    let s = granger_scores(&ts, 1, Direction::Forward).unwrap();
    assert!(s.f_xy > 0.2);
    assert!(s.f_xy > 20.0 * s.f_yx.abs());
}

#[test]
fn backward_scores_are_forward_scores_of_reversal() {
    let mut r = rng(33);
    let m = random_general(2, 2, &mut r);
    let ts = simulate(&m, 500, &mut r, 50).unwrap();
    assert_eq!(
        granger_scores(&ts, 3, Direction::Backward).unwrap(),
        granger_scores(&ts.reversed(), 3, Direction::Forward).unwrap()
    );
}

#[test]
fn white_noise_differences_vanish() {
    let m = VarModel::new(vec![DMatrix::zeros(2, 2)], m2([1.0, 0.3, 0.3, 0.7])).unwrap();
    let ts = simulate(&m, 20_000, &mut rng(34), 0).unwrap();
    let r = trgc_from_series(&ts, 3).unwrap();
    for v in [r.d_xy, r.d_yx, r.d_net, r.d_net_full] {
        assert!(v.abs() < 5e-3, "{r:?}");
    }
}

#[test]
fn mixed_reference_model_has_nonpositive_d_yx() {
    // A_1 = [[0.7, 0], [−0.12, 0.9]], Σ = [[1, 0.6], [0.6, 1]]
    let m = VarModel::new(vec![m2([0.7, 0.0, -0.12, 0.9])], m2([1.0, 0.6, 0.6, 1.0])).unwrap();
    let mut positive = 0;
    for seed in 0..10 {
        let ts = simulate(&m, 20_000, &mut rng(350 + seed), 100).unwrap();
        if trgc_from_series(&ts, 1).unwrap().d_yx > 0.0 {
            positive += 1;
        }
    }
    assert!(positive <= 3, "{positive} of 10 runs had D_yx > 0");
}

#[test]
fn analytic_identity_c0_example() {
    let m = VarModel::new(vec![m2([0.4, 0.3, 0.1, 0.5])], m2([0.75, -0.19, -0.19, 0.74])).unwrap();
    let r = trgc_analytic(&m).unwrap();
    assert!((r.d_yx - (0.83_f64.ln() - 0.75_f64.ln())).abs() < 1e-12);
    assert!(r.d_yx > 0.0);
}

#[test]
fn analytic_restricted_variances_are_time_symmetric() {
    let mut r = rng(36);
    for _ in 0..20 {
        let m = random_general(2, 2, &mut r);
        let a = trgc_analytic(&m).unwrap();
        assert_eq!(a.forward.sigma_x, a.backward.sigma_x);
        assert_eq!(a.forward.sigma_y, a.backward.sigma_y);
        assert!(a.forward.f_xy >= -1e-10 && a.forward.f_yx >= -1e-10);
        assert_eq!(a.d_net, a.d_net_full);
    }
}

#[test]
fn analytic_restricted_variance_matches_long_fit() {
    // y depends on x, so its marginal is not a finite AR
    let m = VarModel::new(vec![m2([0.5, 0.0, 0.6, 0.3])], DMatrix::identity(2, 2)).unwrap();
    let a = trgc_analytic(&m).unwrap();
    assert!(matches!(a.restricted[1], RestrictedSource::Approximate { .. }));
    let ts = simulate(&m, 100_000, &mut rng(37), 100).unwrap();
    let est = granger_scores(&ts, 20, Direction::Forward).unwrap();
    assert!((est.sigma_y - a.forward.sigma_y).abs() / a.forward.sigma_y < 0.02);
}

#[test]
fn difference_signs_on_triangular_models() {
    let mut r = rng(38);
    for k in 0..200 {
        let m = random_lower_triangular(1 + k % 5, &mut r);
        let a = trgc_analytic(&m).unwrap();
        assert!(a.d_yx <= 1e-10 && a.d_xy >= -1e-10 && a.d_net >= -1e-10, "{a:?}");
    }
}

#[test]
fn scaling_channels_leaves_decisions_unchanged() {
    let m = VarModel::new(vec![m2([0.5, 0.0, 0.3, 0.4])], DMatrix::identity(2, 2)).unwrap();
    let spec = BootstrapSpec {
        n_boot: 200,
        seed: 5,
        ..Default::default()
    };
    for seed in 0..4 {
        let ts = simulate(&m, 1000, &mut rng(390 + seed), 50).unwrap();
        let scaled = ts.scaled(&[3.0, 0.25]).unwrap();
        let flows = |series| {
            let dist = bootstrap(series, 2, &spec).unwrap();
            let sig = Significance {
                f_test: Some(f_test_gc(series, 2, 0.05).unwrap()),
                ..dist.significance(0.05)
            };
            DecisionRule::ALL
                .iter()
                .map(|&rule| decide(&dist.estimate, rule, &sig).unwrap().flow)
                .collect::<Vec<_>>()
        };
        assert_eq!(flows(&ts), flows(&scaled));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn channel_swap_negates_net_scores_exactly(seed in any::<u64>(), p in 1usize..5) {
        let mut r = rng(seed);
        let m = random_general(2, 2, &mut r);
        let ts = simulate(&m, 400, &mut r, 20).unwrap();
        let a = trgc_from_series(&ts, p).unwrap();
        let b = trgc_from_series(&ts.swapped().unwrap(), p).unwrap();
        prop_assert_eq!(b.forward.f_net, -a.forward.f_net);
        prop_assert_eq!(b.backward.f_net, -a.backward.f_net);
        prop_assert_eq!(b.d_net, -a.d_net);
        prop_assert_eq!(b.d_net_full, -a.d_net_full);
        prop_assert_eq!(b.forward.f_xy, a.forward.f_yx);
    }

    #[test]
    fn difference_identity_holds_exactly(seed in any::<u64>(), p in 1usize..5) {
        let mut r = rng(seed);
        let m = random_general(2, 2, &mut r);
        let ts = simulate(&m, 300, &mut r, 20).unwrap();
        let a = trgc_from_series(&ts, p).unwrap();
        prop_assert_eq!(a.d_net, a.d_xy - a.d_yx);
        prop_assert_eq!(a.forward.f_net, a.forward.f_xy - a.forward.f_yx);
    }
}
