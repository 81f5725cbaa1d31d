#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trgc::scenarios::random_var;
use trgc::var::VarModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn m2(v: [f64; 4]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &v)
}

/// Random positive definite matrix, eigenvalues bounded away from zero.
pub fn random_pd(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let l = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    &l * l.transpose() / d as f64 + DMatrix::identity(d, d) * 0.2
}

/// Random stable model with general coefficients and a general PD Σ.
pub fn random_general(d: usize, p: usize, rng: &mut ChaCha8Rng) -> VarModel {
    let scale = 0.5 / (p as f64).sqrt();
    let base = random_var(d, p, scale, |_, _, _| true, rng).unwrap();
    VarModel::new(base.coeffs().to_vec(), random_pd(d, rng)).unwrap()
}

/// Random stable bivariate model whose coefficients are lower triangular
/// (x drives y) with diagonal Σ.
pub fn random_lower_triangular(p: usize, rng: &mut ChaCha8Rng) -> VarModel {
    let scale = 0.5 / (p as f64).sqrt();
    let base = random_var(2, p, scale, |_, i, j| j <= i, rng).unwrap();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        0.2 + rng.random::<f64>(),
        0.2 + rng.random::<f64>(),
    ]));
    VarModel::new(base.coeffs().to_vec(), s).unwrap()
}
