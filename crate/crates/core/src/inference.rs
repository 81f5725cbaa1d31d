//! Significance testing: F-tests for standard Granger causality, residual
//! bootstrap confidence intervals for net and difference statistics, and
//! BIC lag-order selection.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Result, TrgcError};
use crate::granger::{forward_fit, trgc_from_channels, Significance, TrgcResult};
use crate::regression::{demeaned, fitted_values, LagColumn, LagGram};
use crate::seed::derive_seed;
use crate::var::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Percentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub method: IntervalMethod,
}

impl ConfidenceInterval {
    pub fn excludes_zero(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// One directional F-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTestResult {
    pub f_stat: f64,
    pub p_value: f64,
    pub significant: bool,
    pub df1: usize,
    pub df2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub x_to_y: FTestResult,
    pub y_to_x: FTestResult,
}

fn f_test_direction(rss_r: f64, rss_f: f64, df1: usize, df2: usize, alpha: f64) -> Result<FTestResult> {
    if !(rss_f > 0.0) {
        return Err(TrgcError::RankDeficient("full-model residual sum of squares is zero".into()));
    }
    let f_stat = ((rss_r - rss_f) / df1 as f64) / (rss_f / df2 as f64);
    let p_value = if f_stat <= 0.0 {
        1.0
    } else {
        let dist = FisherSnedecor::new(df1 as f64, df2 as f64)
            .map_err(|e| TrgcError::Internal(format!("F distribution: {e}")))?;
        dist.sf(f_stat)
    };
    Ok(FTestResult {
        f_stat,
        p_value,
        significant: p_value < alpha,
        df1,
        df2,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TrgcError::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Nested-model F-tests in both directions. The denominator degrees of
/// freedom are `T_eff − 2p − 1`, counting the removed mean.
pub fn f_test_gc(series: &TimeSeries, p: usize, alpha: f64) -> Result<FTest> {
    check_alpha(alpha)?;
    let fit = forward_fit(series, p)?;
    let df2 = fit.t_eff - 2 * p - 1;
    Ok(FTest {
        x_to_y: f_test_direction(fit.rss_restricted[1], fit.rss_full[1], p, df2, alpha)?,
        y_to_x: f_test_direction(fit.rss_restricted[0], fit.rss_full[0], p, df2, alpha)?,
    })
}

/// Bootstrapped statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Forward net Granger score.
    FNet,
    /// Net Granger score of the time-reversed data.
    FNetReversed,
    DNet,
    DNetFull,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::FNet,
        Statistic::FNetReversed,
        Statistic::DNet,
        Statistic::DNetFull,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn of(self, r: &TrgcResult) -> f64 {
        match self {
            Statistic::FNet => r.forward.f_net,
            Statistic::FNetReversed => r.backward.f_net,
            Statistic::DNet => r.d_net,
            Statistic::DNetFull => r.d_net_full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub n_boot: usize,
    pub alpha: f64,
    pub statistic: Statistic,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            n_boot: 500,
            alpha: 0.05,
            statistic: Statistic::DNet,
            seed: 0,
        }
    }
}

impl BootstrapSpec {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n_boot < 100 {
            return Err(TrgcError::InvalidInput(format!(
                "at least 100 bootstrap samples are required, got {}",
                self.n_boot
            )));
        }
        Ok(())
    }
}

/// Bootstrap replicates of every statistic, plus the point estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    pub estimate: TrgcResult,
    samples: [Vec<f64>; 4],
}

impl BootstrapDistribution {
    pub fn samples(&self, stat: Statistic) -> &[f64] {
        &self.samples[stat.index()]
    }

    pub fn interval(&self, stat: Statistic, alpha: f64) -> ConfidenceInterval {
        let (lower, upper) = percentile_interval(self.samples(stat), alpha);
        ConfidenceInterval {
            lower,
            upper,
            estimate: stat.of(&self.estimate),
            method: IntervalMethod::Percentile,
        }
    }

    /// Intervals for all bootstrap-based decision rules.
    pub fn significance(&self, alpha: f64) -> Significance {
        Significance {
            f_test: None,
            f_net: Some(self.interval(Statistic::FNet, alpha)),
            f_net_reversed: Some(self.interval(Statistic::FNetReversed, alpha)),
            d_net: Some(self.interval(Statistic::DNet, alpha)),
            d_net_full: Some(self.interval(Statistic::DNetFull, alpha)),
        }
    }
}

/// Percentile interval at `alpha/2`, `1 − alpha/2` with linear
/// interpolation. The upper bound mirrors the lower one index-wise, so
/// negating every sample maps `(l, u)` to `(−u, −l)` exactly.
fn percentile_interval(samples: &[f64], alpha: f64) -> (f64, f64) {
    let mut a = samples.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    if n == 1 {
        return (a[0], a[0]);
    }
    let h = (n - 1) as f64 * alpha / 2.0;
    let i = (h.floor() as usize).min(n - 2);
    let f = h - i as f64;
    let lower = (1.0 - f) * a[i] + f * a[i + 1];
    let upper = (1.0 - f) * a[n - 1 - i] + f * a[n - 2 - i];
    (lower, upper)
}

/// Two-sided regression fit: fitted values and residual rows over the
/// window `p..T−p`, channels kept separate.
struct TwoSidedFit {
    fitted: [Vec<f64>; 2],
    resid: [Vec<f64>; 2],
}

fn two_sided_fit(x: &[f64], y: &[f64], p: usize) -> Result<TwoSidedFit> {
    let t = x.len();
    // 4p regressors on T − 2p rows, plus a little slack
    let needed = 6 * p + 2;
    if t <= needed {
        return Err(TrgcError::InsufficientData { needed, got: t });
    }
    let data = demeaned(&[x, y]);
    let window = p..t - p;
    let offsets: Vec<isize> = (1..=p as isize).chain((1..=p as isize).map(|l| -l)).collect();
    let mut columns = Vec::new();
    for c in 0..2 {
        columns.push(LagColumn { channel: c, offset: 0 });
        columns.extend(offsets.iter().map(|&o| LagColumn { channel: c, offset: o }));
    }
    let gram = LagGram::new(&data, &columns, window.clone());
    let block = offsets.len() + 1;

    let mut fitted: [Vec<f64>; 2] = Default::default();
    let mut resid: [Vec<f64>; 2] = Default::default();
    for (c, other) in [(0usize, 1usize), (1, 0)] {
        let regressors: Vec<usize> = (1..block)
            .map(|k| c * block + k)
            .chain((1..block).map(|k| other * block + k))
            .collect();
        let (coef, _) = gram.solve(&regressors, &[c * block])?;
        let cols: Vec<LagColumn> = regressors.iter().map(|&k| columns[k]).collect();
        let coef = DVector::from_column_slice(coef.column(0).as_slice());
        let fit = fitted_values(&data, &cols, &coef, window.clone());
        resid[c] = data[c][window.clone()]
            .iter()
            .zip(&fit)
            .map(|(z, f)| z - f)
            .collect();
        fitted[c] = fit;
    }
    Ok(TwoSidedFit { fitted, resid })
}

/// Residual bootstrap of all TRGC statistics.
///
/// `z_t` is regressed on `z_{t−p}..z_{t−1}` and `z_{t+1}..z_{t+p}`; each
/// replicate adds residual rows drawn with replacement (kept as bivariate
/// pairs) to the fitted values and is scored with the ordinary one-sided
/// pipeline. Replicate `b` uses its own seed derived from `spec.seed` and
/// `b`, so the output does not depend on the thread count.
pub fn bootstrap(series: &TimeSeries, p: usize, spec: &BootstrapSpec) -> Result<BootstrapDistribution> {
    spec.validate()?;
    let estimate = crate::granger::trgc_from_series(series, p)?;
    let fit = two_sided_fit(series.channel(0), series.channel(1), p)?;
    let n = fit.resid[0].len();

    let replicates: Vec<[f64; 4]> = (0..spec.n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, b as u64));
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for t in 0..n {
                let s = rng.random_range(0..n);
                xs.push(fit.fitted[0][t] + fit.resid[0][s]);
                ys.push(fit.fitted[1][t] + fit.resid[1][s]);
            }
            let r = trgc_from_channels(&xs, &ys, p)?;
            Ok(Statistic::ALL.map(|s| s.of(&r)))
        })
        .collect::<Result<_>>()?;

    let samples = Statistic::ALL.map(|s| replicates.iter().map(|r| r[s.index()]).collect());
    Ok(BootstrapDistribution { estimate, samples })
}

/// Percentile interval of `spec.statistic`, with the replicate values.
pub fn bootstrap_ci(
    series: &TimeSeries,
    p: usize,
    spec: &BootstrapSpec,
) -> Result<(ConfidenceInterval, Vec<f64>)> {
    let dist = bootstrap(series, p, spec)?;
    Ok((
        dist.interval(spec.statistic, spec.alpha),
        dist.samples(spec.statistic).to_vec(),
    ))
}

/// BIC of each order `1..=p_max`, all evaluated on the window fixed by
/// `p_max`, with the maximum-likelihood residual covariance.
pub fn bic_values(series: &TimeSeries, p_max: usize) -> Result<Vec<f64>> {
    if p_max == 0 {
        return Err(TrgcError::InvalidInput("p_max must be at least 1".into()));
    }
    let d = series.dim();
    let t = series.len();
    let needed = p_max + d * p_max;
    if t <= needed {
        return Err(TrgcError::InsufficientData { needed, got: t });
    }
    let channels: Vec<&[f64]> = (0..d).map(|c| series.channel(c)).collect();
    let data = demeaned(&channels);
    let mut columns: Vec<LagColumn> = (0..d).map(|c| LagColumn { channel: c, offset: 0 }).collect();
    for lag in 1..=p_max {
        columns.extend((0..d).map(|c| LagColumn {
            channel: c,
            offset: lag as isize,
        }));
    }
    let gram = LagGram::new(&data, &columns, p_max..t);
    let t_eff = gram.rows() as f64;
    let targets: Vec<usize> = (0..d).collect();
    (1..=p_max)
        .map(|p| {
            let regressors: Vec<usize> = (d..d + d * p).collect();
            let (_, resid) = gram.solve(&regressors, &targets)?;
            let det = (resid / t_eff).determinant();
            if !(det > 0.0) {
                return Err(TrgcError::RankDeficient(format!(
                    "residual covariance at order {p} is singular"
                )));
            }
            Ok(det.ln() + (d * d * p) as f64 * t_eff.ln() / t_eff)
        })
        .collect()
}

/// Order minimizing BIC over `1..=p_max`; ties go to the smaller order.
pub fn select_order_bic(series: &TimeSeries, p_max: usize) -> Result<usize> {
    let values = bic_values(series, p_max)?;
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    Ok(best + 1)
}
