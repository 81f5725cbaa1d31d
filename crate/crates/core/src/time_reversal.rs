//! Analytic VAR representation of a time-reversed process.
//!
//! A stable VAR(p) run backwards in time is again a VAR(p),
//! `z_t = Ã_1 z_{t+1} + … + Ã_p z_{t+p} + ε̃_t`, and its cross-covariances
//! are the transposes of the forward process's. [`reverse_var1`] implements
//! the closed form for p = 1, [`reverse_varp`] the general construction via
//! the inverse stacked covariance.

use nalgebra::DMatrix;

use crate::error::{Result, TrgcError};
use crate::linalg::{checked_inverse, spd_inverse, symmetrize};
use crate::var::{
    check_stability, solve_cross_covariances, CrossCovSequence, VarModel, MAX_CONDITION,
};

/// `Q = C_Z(0)⁻¹` partitioned into `d × d` blocks `Q_{l,k}`, `l, k ∈ 1..=p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionBlocks {
    order: usize,
    dim: usize,
    q: DMatrix<f64>,
}

impl PrecisionBlocks {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Block `Q_{l,k}` (1-based).
    pub fn block(&self, l: usize, k: usize) -> DMatrix<f64> {
        let d = self.dim;
        self.q.view(((l - 1) * d, (k - 1) * d), (d, d)).into_owned()
    }
}

pub fn precision_blocks(covs: &CrossCovSequence, p: usize) -> Result<PrecisionBlocks> {
    let stacked = covs.stacked(p)?;
    let q = spd_inverse(&stacked, "stacked covariance C_Z(0)", MAX_CONDITION)?;
    Ok(PrecisionBlocks {
        order: p,
        dim: covs.dim(),
        q,
    })
}

/// Closed-form reversal of a VAR(1):
/// `Ã_1 = C(0) A_1ᵀ C(0)⁻¹`, `Σ̃ = C(0) − C(0) A_1ᵀ C(0)⁻¹ A_1 C(0)`.
pub fn reverse_var1(model: &VarModel) -> Result<VarModel> {
    if model.order() != 1 {
        return Err(TrgcError::InvalidInput(format!(
            "closed-form reversal needs p = 1, got p = {}",
            model.order()
        )));
    }
    let covs = solve_cross_covariances(model, 0)?;
    let c0 = &covs.lags()[0];
    let c0_inv = checked_inverse(c0, "C(0)", MAX_CONDITION)?;
    let a = model.coeff(1);
    let a_rev = c0 * a.transpose() * &c0_inv;
    let sigma_rev = symmetrize(&(c0 - c0 * a.transpose() * &c0_inv * a * c0));
    VarModel::new(vec![a_rev], sigma_rev)
}

/// Reversal of a general VAR(p):
///
/// `Ã_j = −(Q_pp + A_pᵀ Σ⁻¹ A_p)⁻¹ (Q_{p,p−j} + A_pᵀ Σ⁻¹ A_{p−j})`,
/// `Σ̃ = (Q_pp + A_pᵀ Σ⁻¹ A_p)⁻¹`, with `Q_{p,0} = 0` and `A_0 = −I`.
///
/// The output is checked for stability; a violation is reported as an
/// internal consistency error.
pub fn reverse_varp(model: &VarModel) -> Result<VarModel> {
    let p = model.order();
    let d = model.dim();
    let covs = solve_cross_covariances(model, p)?;
    let blocks = precision_blocks(&covs, p)?;
    let sigma_inv = spd_inverse(model.resid_cov(), "residual covariance", MAX_CONDITION)?;

    let a_p = model.coeff(p);
    let a_pt_sinv = a_p.transpose() * &sigma_inv;
    let core = blocks.block(p, p) + &a_pt_sinv * a_p;
    let sigma_rev = symmetrize(&spd_inverse(&core, "reversed precision", MAX_CONDITION)?);

    let coeffs = (1..=p)
        .map(|j| {
            let q_term = if j == p {
                DMatrix::zeros(d, d)
            } else {
                blocks.block(p, p - j)
            };
            let a_term = if j == p {
                -DMatrix::<f64>::identity(d, d)
            } else {
                model.coeff(p - j).clone()
            };
            -(&sigma_rev * (q_term + &a_pt_sinv * a_term))
        })
        .collect();
    let reversed = VarModel::new(coeffs, sigma_rev)?;

    let stability = check_stability(&reversed);
    if !stability.stable {
        return Err(TrgcError::Internal(format!(
            "reversed model is unstable (spectral radius {:.6})",
            stability.spectral_radius
        )));
    }
    Ok(reversed)
}

/// `max_h ‖C(h) − C(h)ᵀ‖_max` over all available lags. Zero for mixtures
/// of independent sources.
pub fn mixture_symmetry_check(covs: &CrossCovSequence) -> f64 {
    covs.lags()
        .iter()
        .map(|c| crate::linalg::max_abs_diff(c, &c.transpose()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff};

    fn m2(v: [f64; 4]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &v)
    }

    #[test]
    fn p1_precision_is_inverse_c0() {
        let c0 = m2([2.0, 0.5, 0.5, 1.0]);
        let covs = CrossCovSequence::new(vec![c0.clone(), m2([0.3, 0.1, 0.0, 0.2])]).unwrap();
        let q = precision_blocks(&covs, 1).unwrap();
        assert!(max_abs_diff(&q.block(1, 1), &c0.try_inverse().unwrap()) < 1e-14);

        let id = CrossCovSequence::new(vec![DMatrix::identity(2, 2)]).unwrap();
        assert_eq!(precision_blocks(&id, 1).unwrap().block(1, 1), DMatrix::identity(2, 2));
    }

    #[test]
    fn identity_c0_reversal_transposes() {
        let a = m2([0.4, 0.3, 0.1, 0.5]);
        let m = VarModel::new(vec![a.clone()], m2([0.75, -0.19, -0.19, 0.74])).unwrap();
        let rev = reverse_var1(&m).unwrap();
        assert!(max_abs_diff(rev.coeff(1), &a.transpose()) < 1e-13);
        assert!(max_abs_diff(rev.resid_cov(), &m2([0.83, -0.17, -0.17, 0.66])) < 1e-13);
    }

    #[test]
    fn unidirectional_var1_reversal() {
        // Oracle: C(0) solved by hand from the 3-unknown Yule-Walker system
        // c11 = 0.25 c11 + 1, c12 = 0.2 c11 + 0.15 c12,
        // c22 = 0.16 c11 + 0.24 c12 + 0.09 c22 + 1.
        let c11 = 4.0 / 3.0;
        let c12 = 0.2 * c11 / 0.85;
        let c22 = (0.16 * c11 + 0.24 * c12 + 1.0) / 0.91;
        let c0 = m2([c11, c12, c12, c22]);
        let a = m2([0.5, 0.0, 0.4, 0.3]);
        let c0_inv = c0.clone().try_inverse().unwrap();
        let expected = &c0 - &c0 * a.transpose() * &c0_inv * &a * &c0;

        let m = VarModel::new(vec![a], DMatrix::identity(2, 2)).unwrap();
        let rev = reverse_var1(&m).unwrap();
        assert!(max_abs_diff(rev.resid_cov(), &expected) < 1e-12);
        let s = rev.resid_cov();
        assert!((s[(0, 0)] - 0.835).abs() < 5e-4);
        assert!((s[(0, 1)] - 0.055).abs() < 5e-4);
        assert!((s[(1, 1)] - 1.201).abs() < 5e-4);
        assert!(s[(0, 0)] <= 1.0 && s[(1, 1)] >= 1.0);
    }

    #[test]
    fn diagonal_model_is_a_fixed_point() {
        let m = VarModel::new(
            vec![m2([0.5, 0.0, 0.0, -0.3]), m2([0.2, 0.0, 0.0, 0.1])],
            m2([1.0, 0.0, 0.0, 2.0]),
        )
        .unwrap();
        let rev = reverse_varp(&m).unwrap();
        for h in 1..=2 {
            assert!(max_abs_diff(rev.coeff(h), m.coeff(h)) < 1e-12);
        }
        assert!(max_abs_diff(rev.resid_cov(), m.resid_cov()) < 1e-12);

        let m1 = VarModel::new(vec![m2([0.5, 0.0, 0.0, -0.3])], m2([1.0, 0.0, 0.0, 2.0])).unwrap();
        let r1 = reverse_var1(&m1).unwrap();
        assert!(max_abs_diff(r1.coeff(1), m1.coeff(1)) < 1e-13);
        assert!(max_abs_diff(r1.resid_cov(), m1.resid_cov()) < 1e-13);
    }

    #[test]
    fn bartlett_and_general_reversal_agree() {
        let m = VarModel::new(vec![m2([0.5, -0.2, 0.4, 0.3])], m2([1.0, 0.3, 0.3, 0.5])).unwrap();
        let a = reverse_var1(&m).unwrap();
        let b = reverse_varp(&m).unwrap();
        assert!(max_abs_diff(a.coeff(1), b.coeff(1)) < 1e-12);
        assert!(max_abs_diff(a.resid_cov(), b.resid_cov()) < 1e-12);
    }

    #[test]
    fn singular_sigma_is_refused() {
        let m = VarModel::new(vec![m2([0.5, 0.0, 0.2, 0.3])], m2([1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(reverse_varp(&m), Err(TrgcError::Singular { .. })));
    }

    #[test]
    fn white_noise_is_symmetric_beyond_lag_zero() {
        let m = VarModel::new(vec![DMatrix::zeros(2, 2)], m2([1.0, 0.4, 0.4, 1.0])).unwrap();
        let covs = solve_cross_covariances(&m, 4).unwrap();
        assert_eq!(mixture_symmetry_check(&covs), 0.0);
        assert!(covs.lags()[1..].iter().all(|c| max_abs(c) == 0.0));
    }

    #[test]
    fn unidirectional_coupling_is_asymmetric() {
        let m = VarModel::new(vec![m2([0.5, 0.0, 0.4, 0.3])], DMatrix::identity(2, 2)).unwrap();
        let covs = solve_cross_covariances(&m, 3).unwrap();
        assert!(mixture_symmetry_check(&covs) > 0.05);
    }
}
