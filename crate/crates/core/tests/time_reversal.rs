mod common;

use common::{random_general, random_lower_triangular, rng};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use trgc::linalg::max_abs_diff;
use trgc::structural::{mixture_to_var, MixtureModel};
use trgc::time_reversal::{mixture_symmetry_check, precision_blocks, reverse_var1, reverse_varp};
use trgc::var::{check_stability, solve_cross_covariances, var_from_covariances, VarModel};

fn sorted_eigs(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut e: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    e
}

#[test]
fn schur_identity_for_last_precision_block() {
    let mut r = rng(21);
    for _ in 0..20 {
        let m = random_general(2, 3, &mut r);
        let covs = solve_cross_covariances(&m, 3).unwrap();
        let q = precision_blocks(&covs, 3).unwrap();
        let stacked = covs.stacked(3).unwrap();
        // C_Z(0) = [[C_{Z∖p}, Rᵀ], [R, C(0)]] with the last block row R
        let inner = stacked.view((0, 0), (4, 4)).into_owned();
        let r_block = stacked.view((4, 0), (2, 4)).into_owned();
        let schur = &covs.lags()[0] - &r_block * inner.try_inverse().unwrap() * r_block.transpose();
        let qpp_inv = q.block(3, 3).try_inverse().unwrap();
        assert!(max_abs_diff(&qpp_inv, &schur) < 1e-10);
        let prod = q.matrix() * &stacked;
        assert!(max_abs_diff(&prod, &DMatrix::identity(6, 6)) < 1e-10);
    }
}

#[test]
fn reversed_var4_has_transposed_covariances() {
    let mut r = rng(22);
    for _ in 0..20 {
        let m = random_general(2, 4, &mut r);
        let rev = reverse_varp(&m).unwrap();
        let c = solve_cross_covariances(&m, 6).unwrap();
        let c_rev = solve_cross_covariances(&rev, 6).unwrap();
        for h in 0..=6 {
            assert!(max_abs_diff(&c_rev.lags()[h], &c.lags()[h].transpose()) < 1e-8, "lag {h}");
        }
    }
}

#[test]
fn reversal_matches_yule_walker_on_transposed_covariances() {
    let mut r = rng(23);
    for p in 1..=5 {
        let m = random_general(2, p, &mut r);
        let covs = solve_cross_covariances(&m, p).unwrap();
        let oracle = var_from_covariances(&covs.transposed(), p).unwrap();
        let rev = reverse_varp(&m).unwrap();
        for h in 1..=p {
            assert!(max_abs_diff(rev.coeff(h), oracle.coeff(h)) < 1e-9);
        }
        assert!(max_abs_diff(rev.resid_cov(), oracle.resid_cov()) < 1e-9);
    }
}

#[test]
fn var1_similarity() {
    let mut r = rng(24);
    for _ in 0..30 {
        let m = random_general(2, 1, &mut r);
        let rev = reverse_var1(&m).unwrap();
        let a = sorted_eigs(m.coeff(1));
        let b = sorted_eigs(rev.coeff(1));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}

#[test]
fn last_lag_nonzero_iff_original_nonzero() {
    let mut r = rng(25);
    let m = random_general(2, 3, &mut r);
    assert!(reverse_varp(&m).unwrap().coeff(3).amax() > 0.0);
    let mut coeffs = m.coeffs().to_vec();
    coeffs[2] = DMatrix::zeros(2, 2);
    let trimmed = VarModel::new(coeffs, m.resid_cov().clone()).unwrap();
    assert!(reverse_varp(&trimmed).unwrap().coeff(3).amax() < 1e-12);
}

#[test]
fn mixture_of_independent_sources_is_symmetric() {
    let mut r = rng(26);
    for _ in 0..10 {
        let base = random_general(2, 3, &mut r);
        let b: Vec<DMatrix<f64>> = base
            .coeffs()
            .iter()
            .map(|a| DMatrix::from_diagonal(&a.diagonal()))
            .collect();
        let latent = VarModel::new(b, DMatrix::from_diagonal(&base.resid_cov().diagonal())).unwrap();
        let mixing = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.7, 0.9]);
        let var = mixture_to_var(&MixtureModel::new(mixing, latent).unwrap()).unwrap();
        let covs = solve_cross_covariances(&var, 8).unwrap();
        assert!(mixture_symmetry_check(&covs) < 1e-10);
    }
}

#[test]
fn lower_triangular_models_satisfy_variance_ordering() {
    let mut r = rng(27);
    for k in 0..100 {
        let m = random_lower_triangular(1 + k % 5, &mut r);
        let rev = reverse_varp(&m).unwrap();
        assert!(rev.resid_cov()[(0, 0)] <= m.resid_cov()[(0, 0)] + 1e-10);
        assert!(rev.resid_cov()[(1, 1)] >= m.resid_cov()[(1, 1)] - 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinants_agree(seed in any::<u64>(), p in 1usize..=5) {
        let m = random_general(2, p, &mut rng(seed));
        let rev = reverse_varp(&m).unwrap();
        let (a, b) = (m.resid_cov().determinant(), rev.resid_cov().determinant());
        prop_assert!((a - b).abs() <= 1e-9 * a.abs());
    }

    #[test]
    fn double_reversal_is_identity(seed in any::<u64>(), p in 1usize..=5) {
        let m = random_general(2, p, &mut rng(seed));
        let twice = reverse_varp(&reverse_varp(&m).unwrap()).unwrap();
        for h in 1..=p {
            prop_assert!(max_abs_diff(twice.coeff(h), m.coeff(h)) < 1e-8);
        }
        prop_assert!(max_abs_diff(twice.resid_cov(), m.resid_cov()) < 1e-8);
    }

    #[test]
    fn reversal_preserves_stability(seed in any::<u64>(), p in 1usize..=5) {
        let m = random_general(2, p, &mut rng(seed));
        prop_assert!(check_stability(&reverse_varp(&m).unwrap()).stable);
    }

    #[test]
    fn three_channel_reversal_transposes(seed in any::<u64>()) {
        let m = random_general(3, 2, &mut rng(seed));
        let rev = reverse_varp(&m).unwrap();
        let c = solve_cross_covariances(&m, 3).unwrap();
        let c_rev = solve_cross_covariances(&rev, 3).unwrap();
        for h in 0..=3 {
            prop_assert!(max_abs_diff(&c_rev.lags()[h], &c.lags()[h].transpose()) < 1e-8);
        }
    }
}
