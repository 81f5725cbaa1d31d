use nalgebra::DMatrix;

use crate::error::{Result, TrgcError};
use crate::linalg::{max_abs, max_abs_diff, symmetrize};

/// Which way the regression looks: `Forward` predicts `z_t` from its past,
/// `Backward` predicts `z_t` from its future.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A VAR(p) process `z_t = A_1 z_{t-1} + … + A_p z_{t-p} + ε_t`, `Cov(ε_t) = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    coeffs: Vec<DMatrix<f64>>,
    resid_cov: DMatrix<f64>,
}

impl VarModel {
    /// Builds a model after checking shapes, symmetry and semidefiniteness
    /// of the residual covariance.
    pub fn new(coeffs: Vec<DMatrix<f64>>, resid_cov: DMatrix<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(TrgcError::InvalidInput("VAR order must be at least 1".into()));
        }
        let d = resid_cov.nrows();
        if d == 0 || resid_cov.ncols() != d {
            return Err(TrgcError::InvalidInput(
                "residual covariance must be a non-empty square matrix".into(),
            ));
        }
        for (h, a) in coeffs.iter().enumerate() {
            if a.shape() != (d, d) {
                return Err(TrgcError::InvalidInput(format!(
                    "coefficient matrix A_{} has shape {:?}, expected ({d}, {d})",
                    h + 1,
                    a.shape()
                )));
            }
        }
        if coeffs
            .iter()
            .chain(std::iter::once(&resid_cov))
            .any(|m| m.iter().any(|v| !v.is_finite()))
        {
            return Err(TrgcError::InvalidInput("model contains non-finite entries".into()));
        }
        let scale = max_abs(&resid_cov).max(1.0);
        if max_abs_diff(&resid_cov, &resid_cov.transpose()) > 1e-10 * scale {
            return Err(TrgcError::InvalidInput(
                "residual covariance is not symmetric".into(),
            ));
        }
        let min_eig = symmetrize(&resid_cov)
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 * scale {
            return Err(TrgcError::InvalidInput(format!(
                "residual covariance is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self {
            coeffs,
            resid_cov: symmetrize(&resid_cov),
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.resid_cov.nrows()
    }

    /// `A_1 … A_p`, zero-based (`coeffs()[0]` is `A_1`).
    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// `A_h` for `h ∈ 1..=p`.
    pub fn coeff(&self, h: usize) -> &DMatrix<f64> {
        &self.coeffs[h - 1]
    }

    pub fn resid_cov(&self) -> &DMatrix<f64> {
        &self.resid_cov
    }

    /// `[A_1 … A_p]` as one `d × dp` matrix.
    pub fn stacked_coeffs(&self) -> DMatrix<f64> {
        let d = self.dim();
        let p = self.order();
        let mut out = DMatrix::zeros(d, d * p);
        for (h, a) in self.coeffs.iter().enumerate() {
            out.view_mut((0, h * d), (d, d)).copy_from(a);
        }
        out
    }

    /// True when every coefficient matrix and the residual covariance are
    /// diagonal (no interaction of any kind).
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let off = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .all(|(i, j)| m[(i, j)].abs() <= tol)
        };
        self.coeffs.iter().all(off) && off(&self.resid_cov)
    }
}

/// Univariate AR(p) model.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    pub coeffs: Vec<f64>,
    pub resid_var: f64,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// The dp-dimensional VAR(1) embedding of a VAR(p).
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionForm {
    pub matrix: DMatrix<f64>,
    pub resid_cov: DMatrix<f64>,
}

/// Cross-covariances `C(0) … C(h_max)` of a stationary process, with
/// `C(-h) = C(h)ᵀ` implied.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovSequence {
    lags: Vec<DMatrix<f64>>,
}

impl CrossCovSequence {
    pub fn new(lags: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(c0) = lags.first() else {
            return Err(TrgcError::InvalidInput(
                "cross-covariance sequence needs at least lag 0".into(),
            ));
        };
        let d = c0.nrows();
        if d == 0 || lags.iter().any(|c| c.shape() != (d, d)) {
            return Err(TrgcError::InvalidInput(
                "cross-covariance matrices must share one square shape".into(),
            ));
        }
        Ok(Self { lags })
    }

    pub fn dim(&self) -> usize {
        self.lags[0].nrows()
    }

    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }

    pub fn lags(&self) -> &[DMatrix<f64>] {
        &self.lags
    }

    /// `C(h)` for any `|h| ≤ max_lag`.
    pub fn at(&self, h: isize) -> DMatrix<f64> {
        if h >= 0 {
            self.lags[h as usize].clone()
        } else {
            self.lags[(-h) as usize].transpose()
        }
    }

    /// Covariances of the time-reversed process: every lag transposed.
    pub fn transposed(&self) -> Self {
        Self {
            lags: self.lags.iter().map(|c| c.transpose()).collect(),
        }
    }

    /// Block-Toeplitz covariance of the stacked vector
    /// `Z_t = [z_t; z_{t-1}; …; z_{t-p+1}]`: block `(i, j)` is `C(j - i)`.
    pub fn stacked(&self, p: usize) -> Result<DMatrix<f64>> {
        if p == 0 || p > self.lags.len() {
            return Err(TrgcError::InvalidInput(format!(
                "stacked covariance of order {p} needs lags 0..{}, have 0..{}",
                p.saturating_sub(1),
                self.max_lag()
            )));
        }
        let d = self.dim();
        let mut out = DMatrix::zeros(d * p, d * p);
        for i in 0..p {
            for j in 0..p {
                let block = self.at(j as isize - i as isize);
                out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
            }
        }
        Ok(out)
    }
}

/// A multichannel sampled series, stored `T × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: DMatrix<f64>,
    names: Vec<String>,
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn new(data: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(TrgcError::InvalidInput("time series must be non-empty".into()));
        }
        if names.len() != data.ncols() {
            return Err(TrgcError::InvalidInput(format!(
                "{} column names for {} channels",
                names.len(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TrgcError::InvalidInput("time series contains non-finite values".into()));
        }
        Ok(Self {
            data,
            names,
            seed: None,
        })
    }

    /// Builds a series from per-channel columns, named `x`, `y`, `g`, then
    /// `c3`, `c4`, ….
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let t = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != t) {
            return Err(TrgcError::InvalidInput("columns differ in length".into()));
        }
        let mut data = DMatrix::zeros(t, d);
        for (c, col) in columns.iter().enumerate() {
            data.column_mut(c).copy_from_slice(col);
        }
        Self::new(data, default_names(d))
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Contiguous samples of channel `c`.
    pub fn channel(&self, c: usize) -> &[f64] {
        let t = self.len();
        &self.data.as_slice()[c * t..(c + 1) * t]
    }

    /// The same samples in reverse time order.
    pub fn reversed(&self) -> Self {
        let t = self.len();
        let mut data = self.data.clone();
        for c in 0..self.dim() {
            let col = &mut data.as_mut_slice()[c * t..(c + 1) * t];
            col.reverse();
        }
        Self {
            data,
            names: self.names.clone(),
            seed: self.seed,
        }
    }

    /// Channels reordered (or subset) by index.
    pub fn select(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.dim()) {
            return Err(TrgcError::InvalidInput(format!("no channel {bad}")));
        }
        let t = self.len();
        let mut data = DMatrix::zeros(t, channels.len());
        for (k, &c) in channels.iter().enumerate() {
            data.column_mut(k).copy_from_slice(self.channel(c));
        }
        Ok(Self {
            data,
            names: channels.iter().map(|&c| self.names[c].clone()).collect(),
            seed: self.seed,
        })
    }

    /// Bivariate series with the two channels exchanged.
    pub fn swapped(&self) -> Result<Self> {
        if self.dim() != 2 {
            return Err(TrgcError::InvalidInput("channel swap needs a bivariate series".into()));
        }
        self.select(&[1, 0])
    }

    /// Each channel multiplied by its own factor.
    pub fn scaled(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.dim() {
            return Err(TrgcError::InvalidInput("one scale factor per channel".into()));
        }
        let mut out = self.clone();
        for (c, &f) in factors.iter().enumerate() {
            out.data.column_mut(c).scale_mut(f);
        }
        Ok(out)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(TrgcError::InvalidInput("one name per channel".into()));
        }
        self.names = names;
        Ok(self)
    }
}

pub(crate) fn default_names(d: usize) -> Vec<String> {
    (0..d)
        .map(|c| match c {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "g".to_string(),
            _ => format!("c{c}"),
        })
        .collect()
}
