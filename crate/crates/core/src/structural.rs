//! Structural VAR and mixture-of-sources representations, and their
//! conversion to the reduced-form VAR.
//!
//! Only the forward conversions are provided; the reverse factorizations
//! are not unique.

use nalgebra::DMatrix;

use crate::error::{Result, TrgcError};
use crate::linalg::{checked_inverse, symmetrize};
use crate::var::{VarModel, MAX_CONDITION};

/// `z_t = Γ_0 z_t + Σ_h Γ_h z_{t−h} + ε̄_t` with `cov(ε̄) = Σ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvarModel {
    gamma0: DMatrix<f64>,
    gammas: Vec<DMatrix<f64>>,
    resid_cov: DMatrix<f64>,
}

impl SvarModel {
    pub fn new(gamma0: DMatrix<f64>, gammas: Vec<DMatrix<f64>>, resid_cov: DMatrix<f64>) -> Result<Self> {
        let d = gamma0.nrows();
        if gamma0.ncols() != d {
            return Err(TrgcError::InvalidInput("Gamma0 must be square".into()));
        }
        if gammas.is_empty() {
            return Err(TrgcError::InvalidInput("SVAR needs at least one lag matrix".into()));
        }
        if gammas.iter().any(|g| g.shape() != (d, d)) || resid_cov.shape() != (d, d) {
            return Err(TrgcError::InvalidInput(format!("all SVAR matrices must be {d}x{d}")));
        }
        if (0..d).any(|i| gamma0[(i, i)] != 0.0) {
            return Err(TrgcError::InvalidInput("Gamma0 must have a zero diagonal".into()));
        }
        Ok(Self {
            gamma0,
            gammas,
            resid_cov,
        })
    }

    pub fn order(&self) -> usize {
        self.gammas.len()
    }

    pub fn dim(&self) -> usize {
        self.gamma0.nrows()
    }

    pub fn gamma0(&self) -> &DMatrix<f64> {
        &self.gamma0
    }

    pub fn gammas(&self) -> &[DMatrix<f64>] {
        &self.gammas
    }

    pub fn resid_cov(&self) -> &DMatrix<f64> {
        &self.resid_cov
    }
}

/// Observations `z_t = M s_t` of latent sources following a VAR with
/// coefficients `B_h` and residual covariance `Σ́`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    mixing: DMatrix<f64>,
    latent: VarModel,
}

impl MixtureModel {
    pub fn new(mixing: DMatrix<f64>, latent: VarModel) -> Result<Self> {
        let d = latent.dim();
        if mixing.shape() != (d, d) {
            return Err(TrgcError::InvalidInput(format!("mixing matrix must be {d}x{d}")));
        }
        Ok(Self { mixing, latent })
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub fn latent(&self) -> &VarModel {
        &self.latent
    }
}

/// `A_h = (I − Γ_0)⁻¹ Γ_h`, `Σ = (I − Γ_0)⁻¹ Σ̄ (I − Γ_0)⁻ᵀ`.
pub fn svar_to_var(svar: &SvarModel) -> Result<VarModel> {
    let d = svar.dim();
    let lead = DMatrix::identity(d, d) - &svar.gamma0;
    let inv = checked_inverse(&lead, "I - Gamma0", MAX_CONDITION)?;
    let coeffs = svar.gammas.iter().map(|g| &inv * g).collect();
    let sigma = symmetrize(&(&inv * &svar.resid_cov * inv.transpose()));
    VarModel::new(coeffs, sigma)
}

/// `A_h = M B_h M⁻¹`, `Σ = M Σ́ Mᵀ`.
pub fn mixture_to_var(mix: &MixtureModel) -> Result<VarModel> {
    let m = &mix.mixing;
    let inv = checked_inverse(m, "mixing matrix", MAX_CONDITION)?;
    let coeffs = mix.latent.coeffs().iter().map(|b| m * b * &inv).collect();
    let sigma = symmetrize(&(m * mix.latent.resid_cov() * m.transpose()));
    VarModel::new(coeffs, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn m2(v: [f64; 4]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &v)
    }

    #[test]
    fn zero_gamma0_is_identity_conversion() {
        let g1 = m2([0.3, 0.1, 0.0, 0.4]);
        let s = m2([1.0, 0.2, 0.2, 0.5]);
        let v = svar_to_var(&SvarModel::new(DMatrix::zeros(2, 2), vec![g1.clone()], s.clone()).unwrap()).unwrap();
        assert_eq!(v.coeff(1), &g1);
        assert_eq!(v.resid_cov(), &s);
    }

    #[test]
    fn identity_mixing_is_identity_conversion() {
        let latent = VarModel::new(vec![m2([0.3, 0.1, 0.0, 0.4])], m2([1.0, 0.2, 0.2, 0.5])).unwrap();
        let v = mixture_to_var(&MixtureModel::new(DMatrix::identity(2, 2), latent.clone()).unwrap()).unwrap();
        assert!(max_abs_diff(v.coeff(1), latent.coeff(1)) < 1e-15);
    }

    #[test]
    fn nonzero_gamma0_diagonal_is_rejected() {
        assert!(SvarModel::new(m2([0.1, 0.0, 0.0, 0.0]), vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn singular_lead_matrix() {
        let svar = SvarModel::new(m2([0.0, 1.0, 1.0, 0.0]), vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(svar_to_var(&svar), Err(TrgcError::Singular { .. })));
    }
}
