//! Least-squares estimation of VAR and AR models from data.

use nalgebra::DMatrix;

use super::model::{ArModel, Direction, TimeSeries, VarModel};
use crate::error::{Result, TrgcError};
use crate::regression::{demeaned, LagColumn, LagGram};

/// Fits a VAR(p) by least squares after mean removal.
///
/// `Forward` regresses `z_t` on `z_{t-1} … z_{t-p}`; `Backward` regresses
/// `z_t` on `z_{t+1} … z_{t+p}` and is computed as the forward fit of the
/// index-reversed series. The residual covariance is normalized by
/// `T_eff − d·p`, where `T_eff = T − p` is the number of target rows.
pub fn fit_var_ols(series: &TimeSeries, p: usize, direction: Direction) -> Result<VarModel> {
    match direction {
        Direction::Forward => fit_var_forward(series, p),
        Direction::Backward => fit_var_forward(&series.reversed(), p),
    }
}

fn fit_var_forward(series: &TimeSeries, p: usize) -> Result<VarModel> {
    if p == 0 {
        return Err(TrgcError::InvalidInput("VAR order must be at least 1".into()));
    }
    let d = series.dim();
    let t = series.len();
    if t <= p + d * p {
        return Err(TrgcError::InsufficientData {
            needed: p + d * p,
            got: t,
        });
    }
    let channels: Vec<&[f64]> = (0..d).map(|c| series.channel(c)).collect();
    let data = demeaned(&channels);

    let mut columns: Vec<LagColumn> = (0..d)
        .map(|c| LagColumn { channel: c, offset: 0 })
        .collect();
    for lag in 1..=p {
        for c in 0..d {
            columns.push(LagColumn {
                channel: c,
                offset: lag as isize,
            });
        }
    }
    let gram = LagGram::new(&data, &columns, p..t);
    let targets: Vec<usize> = (0..d).collect();
    let regressors: Vec<usize> = (d..d + d * p).collect();
    let (coef, resid) = gram.solve(&regressors, &targets)?;

    let dof = (gram.rows() - d * p) as f64;
    let sigma = resid / dof;
    // coef row (lag-1)*d + c, column i  ->  A_lag[i][c]
    let coeffs = (0..p)
        .map(|h| {
            let mut a = DMatrix::zeros(d, d);
            for i in 0..d {
                for c in 0..d {
                    a[(i, c)] = coef[(h * d + c, i)];
                }
            }
            a
        })
        .collect();
    VarModel::new(coeffs, sigma)
}

/// Fits a univariate AR(p) to `samples` by least squares after mean removal,
/// residual variance normalized by `T_eff − p`.
pub fn fit_ar_univariate(samples: &[f64], p: usize, direction: Direction) -> Result<ArModel> {
    let series = TimeSeries::from_columns(&[samples.to_vec()])?;
    let model = fit_var_ols(&series, p, direction)?;
    Ok(ArModel {
        coeffs: model.coeffs().iter().map(|a| a[(0, 0)]).collect(),
        resid_var: model.resid_cov()[(0, 0)],
    })
}
