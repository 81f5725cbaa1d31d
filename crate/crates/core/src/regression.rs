//! Least squares on lagged copies of a multichannel series.
//!
//! All regressions of one analysis share a single Gram matrix of the
//! lagged columns over a common target window, so restricted and full
//! models see exactly the same rows. Sub-regressions are solved from the
//! Gram matrix by Cholesky factorization.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrgcError};

/// Mean-removed copies of each channel.
pub(crate) fn demeaned(channels: &[&[f64]]) -> Vec<Vec<f64>> {
    channels
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect()
}

/// A lagged column: channel `c` shifted by `offset`, so row `t` holds
/// `z_c[t - offset]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LagColumn {
    pub channel: usize,
    pub offset: isize,
}

pub(crate) struct LagGram {
    gram: DMatrix<f64>,
    rows: usize,
}

fn column_slice<'a>(data: &'a [Vec<f64>], col: LagColumn, window: &Range<usize>) -> &'a [f64] {
    let start = (window.start as isize - col.offset) as usize;
    let end = (window.end as isize - col.offset) as usize;
    &data[col.channel][start..end]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four independent accumulators; order depends only on position
    let n = a.len();
    let chunks = n / 4;
    let mut acc = [0.0_f64; 4];
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl LagGram {
    /// Gram matrix of `columns` over target rows `window`. Every shifted
    /// column must stay inside the data.
    pub fn new(data: &[Vec<f64>], columns: &[LagColumn], window: Range<usize>) -> Self {
        let n = columns.len();
        let slices: Vec<&[f64]> = columns
            .iter()
            .map(|&c| column_slice(data, c, &window))
            .collect();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(slices[i], slices[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        Self {
            gram,
            rows: window.len(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Regresses each target column on `regressors`. Returns the coefficient
    /// matrix (one column per target) and the residual cross-product matrix
    /// `E'E` between targets.
    pub fn solve(&self, regressors: &[usize], targets: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let k = regressors.len();
        let m = targets.len();
        let mut tt = DMatrix::zeros(m, m);
        for (a, &i) in targets.iter().enumerate() {
            for (b, &j) in targets.iter().enumerate() {
                tt[(a, b)] = self.gram[(i, j)];
            }
        }
        if k == 0 {
            return Ok((DMatrix::zeros(0, m), tt));
        }
        let mut xx = DMatrix::zeros(k, k);
        for (a, &i) in regressors.iter().enumerate() {
            for (b, &j) in regressors.iter().enumerate() {
                xx[(a, b)] = self.gram[(i, j)];
            }
        }
        let mut xy = DMatrix::zeros(k, m);
        for (a, &i) in regressors.iter().enumerate() {
            for (b, &j) in targets.iter().enumerate() {
                xy[(a, b)] = self.gram[(i, j)];
            }
        }
        let max_diag = (0..k).map(|i| xx[(i, i)]).fold(0.0_f64, f64::max);
        if !(max_diag > 0.0) {
            return Err(TrgcError::RankDeficient("all regressors are zero".into()));
        }
        let chol = xx
            .clone()
            .cholesky()
            .ok_or_else(|| TrgcError::RankDeficient("Gram matrix is not positive definite".into()))?;
        let l = chol.l_dirty();
        let min_pivot = (0..k).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot <= 1e-12 * max_diag {
            return Err(TrgcError::RankDeficient(format!(
                "smallest pivot {min_pivot:.3e} relative to {max_diag:.3e}"
            )));
        }
        let coef = chol.solve(&xy);
        let resid = tt - coef.transpose() * &xy;
        Ok((coef, resid))
    }

    /// Residual sum of squares of one target on `regressors`.
    pub fn rss(&self, regressors: &[usize], target: usize) -> Result<f64> {
        let (_, resid) = self.solve(regressors, &[target])?;
        Ok(resid[(0, 0)])
    }
}

/// Applies fitted coefficients (`coef` rows ordered like `regressors`) to
/// produce fitted values for one target over `window`.
pub(crate) fn fitted_values(
    data: &[Vec<f64>],
    regressors: &[LagColumn],
    coef: &DVector<f64>,
    window: Range<usize>,
) -> Vec<f64> {
    let mut out = vec![0.0; window.len()];
    for (col, &b) in regressors.iter().zip(coef.iter()) {
        let src = column_slice(data, *col, &window);
        for (o, s) in out.iter_mut().zip(src) {
            *o += b * s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_relation() {
        // y_t = 0.5 x_{t-1} - 0.25 x_{t-2}, noiseless
        let x: Vec<f64> = (0..50).map(|t| ((t * 7919) % 13) as f64 - 6.0).collect();
        let mut y = vec![0.0; 50];
        for t in 2..50 {
            y[t] = 0.5 * x[t - 1] - 0.25 * x[t - 2];
        }
        let data = vec![x, y];
        let cols = vec![
            LagColumn { channel: 1, offset: 0 },
            LagColumn { channel: 0, offset: 1 },
            LagColumn { channel: 0, offset: 2 },
        ];
        let g = LagGram::new(&data, &cols, 2..50);
        let (coef, resid) = g.solve(&[1, 2], &[0]).unwrap();
        assert!((coef[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((coef[(1, 0)] + 0.25).abs() < 1e-12);
        assert!(resid[(0, 0)].abs() < 1e-9);
    }

    #[test]
    fn collinear_regressors_are_rank_deficient() {
        let x: Vec<f64> = (0..30).map(|t| (t as f64).sin()).collect();
        let data = vec![x.clone(), x];
        let cols = vec![
            LagColumn { channel: 0, offset: 0 },
            LagColumn { channel: 0, offset: 1 },
            LagColumn { channel: 1, offset: 1 },
        ];
        let g = LagGram::new(&data, &cols, 1..30);
        assert!(matches!(g.solve(&[1, 2], &[0]), Err(TrgcError::RankDeficient(_))));
    }
}
