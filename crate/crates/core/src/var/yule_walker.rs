//! Companion form, stability, and the Yule-Walker map between
//! `(A_1 … A_p, Σ)` and cross-covariances.

use nalgebra::DMatrix;

use super::model::{CompanionForm, CrossCovSequence, VarModel};
use crate::error::{Result, TrgcError};
use crate::linalg::{solve_discrete_lyapunov, spd_inverse, spectral_radius, symmetrize};

/// Companion eigenvalue moduli must stay below `1 − STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// Largest accepted condition number of a stacked covariance `C_Z(0)`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub spectral_radius: f64,
}

pub fn companion_form(model: &VarModel) -> CompanionForm {
    let d = model.dim();
    let p = model.order();
    let n = d * p;
    let mut matrix = DMatrix::zeros(n, n);
    for (h, a) in model.coeffs().iter().enumerate() {
        matrix.view_mut((0, h * d), (d, d)).copy_from(a);
    }
    for k in 1..p {
        for i in 0..d {
            matrix[(k * d + i, (k - 1) * d + i)] = 1.0;
        }
    }
    let mut resid_cov = DMatrix::zeros(n, n);
    resid_cov.view_mut((0, 0), (d, d)).copy_from(model.resid_cov());
    CompanionForm { matrix, resid_cov }
}

pub fn check_stability(model: &VarModel) -> Stability {
    let radius = spectral_radius(&companion_form(model).matrix);
    Stability {
        stable: radius < 1.0 - STABILITY_MARGIN,
        spectral_radius: radius,
    }
}

/// Solves the Yule-Walker equations of a stable model for `C(0) … C(h_max)`.
pub fn solve_cross_covariances(model: &VarModel, h_max: usize) -> Result<CrossCovSequence> {
    let stability = check_stability(model);
    if !stability.stable {
        return Err(TrgcError::Unstable {
            radius: stability.spectral_radius,
        });
    }
    let d = model.dim();
    let p = model.order();
    let comp = companion_form(model);
    let stacked = solve_discrete_lyapunov(&comp.matrix, &comp.resid_cov)?;

    // top block row of C_Z(0) holds C(0) … C(p-1)
    let mut lags: Vec<DMatrix<f64>> = (0..p)
        .map(|j| stacked.view((0, j * d), (d, d)).into_owned())
        .collect();
    lags[0] = symmetrize(&lags[0]);
    let at = |lags: &[DMatrix<f64>], h: isize| -> DMatrix<f64> {
        if h >= 0 {
            lags[h as usize].clone()
        } else {
            lags[(-h) as usize].transpose()
        }
    };
    while lags.len() <= h_max {
        let h = lags.len() as isize;
        let mut next = DMatrix::zeros(d, d);
        for (k, a) in model.coeffs().iter().enumerate() {
            next += a * at(&lags, h - 1 - k as isize);
        }
        lags.push(next);
    }
    lags.truncate(h_max + 1);
    CrossCovSequence::new(lags)
}

/// Recovers the unique VAR(p) whose Yule-Walker equations are satisfied by
/// `covs`: `[A_1 … A_p] = [C(1) … C(p)] C_Z(0)⁻¹` and
/// `Σ = C(0) − [A_1 … A_p] C_Z(0) [A_1 … A_p]ᵀ`.
pub fn var_from_covariances(covs: &CrossCovSequence, p: usize) -> Result<VarModel> {
    if p == 0 {
        return Err(TrgcError::InvalidInput("VAR order must be at least 1".into()));
    }
    if covs.max_lag() < p {
        return Err(TrgcError::InvalidInput(format!(
            "order {p} needs covariances up to lag {p}, have {}",
            covs.max_lag()
        )));
    }
    let d = covs.dim();
    let stacked = covs.stacked(p)?;
    let q = spd_inverse(&stacked, "stacked covariance C_Z(0)", MAX_CONDITION)?;
    let mut rhs = DMatrix::zeros(d, d * p);
    for h in 1..=p {
        rhs.view_mut((0, (h - 1) * d), (d, d))
            .copy_from(&covs.lags()[h]);
    }
    let coef = &rhs * &q;
    let sigma = symmetrize(&(&covs.lags()[0] - &coef * &stacked * coef.transpose()));
    let coeffs = (0..p)
        .map(|h| coef.view((0, h * d), (d, d)).into_owned())
        .collect();
    VarModel::new(coeffs, sigma)
}
