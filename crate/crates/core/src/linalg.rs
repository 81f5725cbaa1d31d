//! Small dense linear-algebra helpers shared by the VAR routines.

use nalgebra::DMatrix;

use crate::error::{Result, TrgcError};

/// Largest system size for which the discrete Lyapunov equation is solved
/// through the vectorized Kronecker system.
pub const KRONECKER_MAX_DIM: usize = 12;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// 2-norm condition number from the singular values. Returns infinity for
/// exactly singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix, refusing when the condition number exceeds
/// `max_cond`.
pub fn checked_inverse(m: &DMatrix<f64>, what: &'static str, max_cond: f64) -> Result<DMatrix<f64>> {
    let cond = condition_number(m);
    if !(cond <= max_cond) {
        return Err(TrgcError::Singular { what, cond });
    }
    m.clone()
        .try_inverse()
        .ok_or(TrgcError::Singular { what, cond })
}

/// Inverse of a symmetric positive definite matrix (Cholesky based), with the
/// result symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>, what: &'static str, max_cond: f64) -> Result<DMatrix<f64>> {
    let cond = condition_number(m);
    if !(cond <= max_cond) {
        return Err(TrgcError::Singular { what, cond });
    }
    match m.clone().cholesky() {
        Some(ch) => Ok(symmetrize(&ch.inverse())),
        None => Err(TrgcError::Singular { what, cond }),
    }
}

/// A factor `L` with `L Lᵀ = m` for a symmetric positive semidefinite `m`.
///
/// Cholesky when it succeeds, otherwise an eigen-decomposition square root
/// with negative eigenvalues clipped to zero.
pub fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = symmetrize(m).symmetric_eigen();
    let scale = max_abs(m).max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return Err(TrgcError::InvalidInput(
            "covariance matrix is not positive semidefinite".into(),
        ));
    }
    let n = m.nrows();
    let mut v = eig.eigenvectors.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            v[(i, j)] *= s;
        }
    }
    Ok(v)
}

/// Spectral radius of a square real matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Solves `X = A X Aᵀ + Q` for a stable `A`.
///
/// Uses the vectorized form `vec X = (I − A⊗A)⁻¹ vec Q` up to
/// [`KRONECKER_MAX_DIM`], and doubling iteration beyond that.
pub fn solve_discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(TrgcError::InvalidInput(
            "Lyapunov equation needs square, conforming matrices".into(),
        ));
    }
    let x = if n <= KRONECKER_MAX_DIM {
        lyapunov_kronecker(a, q)?
    } else {
        lyapunov_doubling(a, q)?
    };
    Ok(symmetrize(&x))
}

fn lyapunov_kronecker(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let nn = n * n;
    let system = DMatrix::<f64>::identity(nn, nn) - a.kronecker(a);
    let lu = system.clone().lu();
    // column-major storage makes the matrix buffer equal to vec(.)
    let rhs = DMatrix::from_column_slice(nn, 1, q.as_slice());
    let mut sol = lu.solve(&rhs).ok_or(TrgcError::Singular {
        what: "I - A (x) A",
        cond: f64::INFINITY,
    })?;
    // one step of iterative refinement
    let resid = &rhs - &system * &sol;
    if let Some(corr) = lu.solve(&resid) {
        sol += corr;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(TrgcError::Singular {
            what: "I - A (x) A",
            cond: f64::INFINITY,
        });
    }
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

fn lyapunov_doubling(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut x = q.clone();
    let mut ak = a.clone();
    for _ in 0..200 {
        let next = &x + &ak * &x * ak.transpose();
        ak = &ak * &ak;
        x = next;
        let size = max_abs(&ak);
        if !size.is_finite() {
            break;
        }
        if size < 1e-20 {
            return Ok(x);
        }
    }
    Err(TrgcError::Unstable {
        radius: spectral_radius(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lyap_residual(a: &DMatrix<f64>, q: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
        max_abs(&(x - a * x * a.transpose() - q))
    }

    #[test]
    fn kronecker_and_doubling_agree() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, -0.2, 0.3, 0.4, 0.0, 0.1, 0.6]);
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 0.5]);
        let xk = lyapunov_kronecker(&a, &q).unwrap();
        let xd = lyapunov_doubling(&a, &q).unwrap();
        assert!(max_abs_diff(&xk, &xd) < 1e-12);
        assert!(lyap_residual(&a, &q, &xk) < 1e-13);
    }

    #[test]
    fn doubling_rejects_unstable() {
        let a = DMatrix::from_row_slice(1, 1, &[1.5]);
        let q = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(matches!(
            lyapunov_doubling(&a, &q),
            Err(TrgcError::Unstable { .. })
        ));
    }

    #[test]
    fn psd_factor_handles_zero_matrix() {
        let z = DMatrix::<f64>::zeros(2, 2);
        let l = psd_factor(&z).unwrap();
        assert_eq!(max_abs(&l), 0.0);
    }

    #[test]
    fn psd_factor_reconstructs() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = psd_factor(&m).unwrap();
        assert!(max_abs_diff(&(&l * l.transpose()), &m) < 1e-12);
    }

    #[test]
    fn singular_inverse_reports_condition() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        match checked_inverse(&m, "m", 1e12) {
            Err(TrgcError::Singular { cond, .. }) => assert!(cond > 1e12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
