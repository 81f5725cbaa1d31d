//! Granger scores, net scores, time-reversed scores and the TRGC decision
//! rules, estimated from data or computed exactly from a model.
//!
//! Channel 0 of a bivariate series is `x`, channel 1 is `y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrgcError};
use crate::inference::{ConfidenceInterval, FTest};
use crate::regression::{demeaned, LagColumn, LagGram};
use crate::time_reversal::reverse_varp;
use crate::var::{solve_cross_covariances, Direction, TimeSeries, VarModel};

/// Granger scores in one time direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrangerScores {
    /// `x → y`: `log(Σ_y / Σ_yy)`.
    pub f_xy: f64,
    /// `y → x`: `log(Σ_x / Σ_xx)`.
    pub f_yx: f64,
    pub f_net: f64,
    /// Restricted (univariate AR) residual variances.
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Unrestricted (bivariate VAR) residual variances.
    pub sigma_xx: f64,
    pub sigma_yy: f64,
}

impl GrangerScores {
    fn from_variances(sigma_x: f64, sigma_y: f64, sigma_xx: f64, sigma_yy: f64) -> Self {
        let f_xy = (sigma_y / sigma_yy).ln();
        let f_yx = (sigma_x / sigma_xx).ln();
        Self {
            f_xy,
            f_yx,
            f_net: f_xy - f_yx,
            sigma_x,
            sigma_y,
            sigma_xx,
            sigma_yy,
        }
    }

    /// Finite-sample scores can dip below zero; they are kept as-is.
    pub fn has_negative_score(&self) -> bool {
        self.f_xy < 0.0 || self.f_yx < 0.0
    }
}

/// How the restricted-model variances of a channel were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RestrictedSource {
    /// Least-squares AR fit to data.
    Estimated,
    /// The channel's marginal process is a finite AR of the model's order.
    Exact,
    /// Levinson-Durbin prediction variance truncated at `order` lags.
    Approximate { order: usize },
}

/// Forward and time-reversed scores and their differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrgcResult {
    pub forward: GrangerScores,
    pub backward: GrangerScores,
    pub d_yx: f64,
    pub d_xy: f64,
    /// Always `d_xy − d_yx`.
    pub d_net: f64,
    /// Net difference from the full models only.
    pub d_net_full: f64,
    pub restricted: [RestrictedSource; 2],
}

impl TrgcResult {
    pub(crate) fn from_parts(forward: GrangerScores, backward: GrangerScores, restricted: [RestrictedSource; 2]) -> Self {
        let d_xy = forward.f_xy - backward.f_xy;
        let d_yx = forward.f_yx - backward.f_yx;
        let d_net_full = full_model_difference(&forward, &backward);
        Self {
            forward,
            backward,
            d_yx,
            d_xy,
            d_net: d_xy - d_yx,
            d_net_full,
            restricted,
        }
    }
}

fn full_model_difference(forward: &GrangerScores, backward: &GrangerScores) -> f64 {
    (backward.sigma_yy.ln() - backward.sigma_xx.ln()) - (forward.sigma_yy.ln() - forward.sigma_xx.ln())
}

/// Plain-number score report, as written by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    #[serde(rename = "F_xy")]
    pub f_xy: f64,
    #[serde(rename = "F_yx")]
    pub f_yx: f64,
    #[serde(rename = "F_net")]
    pub f_net: f64,
    #[serde(rename = "Ftil_xy")]
    pub ftil_xy: f64,
    #[serde(rename = "Ftil_yx")]
    pub ftil_yx: f64,
    #[serde(rename = "D_xy")]
    pub d_xy: f64,
    #[serde(rename = "D_yx")]
    pub d_yx: f64,
    #[serde(rename = "D_net")]
    pub d_net: f64,
    #[serde(rename = "D_net_full")]
    pub d_net_full: f64,
}

impl From<&TrgcResult> for ScoreReport {
    fn from(r: &TrgcResult) -> Self {
        Self {
            f_xy: r.forward.f_xy,
            f_yx: r.forward.f_yx,
            f_net: r.forward.f_net,
            ftil_xy: r.backward.f_xy,
            ftil_yx: r.backward.f_yx,
            d_xy: r.d_xy,
            d_yx: r.d_yx,
            d_net: r.d_net,
            d_net_full: r.d_net_full,
        }
    }
}

/// Residual sums of squares of the four nested regressions behind one set
/// of Granger scores, over a shared window of `t_eff` targets.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BivariateFit {
    pub p: usize,
    pub t_eff: usize,
    pub rss_restricted: [f64; 2],
    pub rss_full: [f64; 2],
}

impl BivariateFit {
    /// Forward fit of `x` (channel 0) and `y` (channel 1).
    ///
    /// Each target is regressed on its own lags first and the other
    /// channel's lags second, so exchanging the channels reproduces the
    /// same arithmetic bit for bit.
    pub fn new(x: &[f64], y: &[f64], p: usize) -> Result<Self> {
        if p == 0 {
            return Err(TrgcError::InvalidInput("lag order must be at least 1".into()));
        }
        let t = x.len();
        if y.len() != t {
            return Err(TrgcError::InvalidInput("channels differ in length".into()));
        }
        // the full model needs T_eff − 2p ≥ 1 residual degrees of freedom
        // beyond the intercept
        let needed = 3 * p + 1;
        if t <= needed {
            return Err(TrgcError::InsufficientData { needed, got: t });
        }
        let data = demeaned(&[x, y]);
        let columns: Vec<LagColumn> = (0..2)
            .flat_map(|c| {
                (0..=p).map(move |l| LagColumn {
                    channel: c,
                    offset: l as isize,
                })
            })
            .collect();
        let gram = LagGram::new(&data, &columns, p..t);
        let idx = |c: usize, l: usize| c * (p + 1) + l;

        let mut rss_restricted = [0.0; 2];
        let mut rss_full = [0.0; 2];
        for (c, other) in [(0usize, 1usize), (1, 0)] {
            let own: Vec<usize> = (1..=p).map(|l| idx(c, l)).collect();
            let mut full = own.clone();
            full.extend((1..=p).map(|l| idx(other, l)));
            rss_restricted[c] = gram.rss(&own, idx(c, 0))?;
            rss_full[c] = gram.rss(&full, idx(c, 0))?;
        }
        if rss_full.iter().any(|&r| !(r > 0.0)) {
            return Err(TrgcError::RankDeficient("zero residual variance in full model".into()));
        }
        Ok(Self {
            p,
            t_eff: gram.rows(),
            rss_restricted,
            rss_full,
        })
    }

    pub fn scores(&self) -> GrangerScores {
        let restricted_dof = (self.t_eff - self.p) as f64;
        let full_dof = (self.t_eff - 2 * self.p) as f64;
        GrangerScores::from_variances(
            self.rss_restricted[0] / restricted_dof,
            self.rss_restricted[1] / restricted_dof,
            self.rss_full[0] / full_dof,
            self.rss_full[1] / full_dof,
        )
    }
}

fn require_bivariate(series: &TimeSeries) -> Result<()> {
    if series.dim() != 2 {
        return Err(TrgcError::InvalidInput(format!(
            "Granger scores need a bivariate series, got {} channels",
            series.dim()
        )));
    }
    Ok(())
}

pub(crate) fn forward_fit(series: &TimeSeries, p: usize) -> Result<BivariateFit> {
    require_bivariate(series)?;
    BivariateFit::new(series.channel(0), series.channel(1), p)
}

/// Granger scores of a bivariate series. The backward direction is the
/// forward computation on the index-reversed series.
pub fn granger_scores(series: &TimeSeries, p: usize, direction: Direction) -> Result<GrangerScores> {
    let fit = match direction {
        Direction::Forward => forward_fit(series, p)?,
        Direction::Backward => forward_fit(&series.reversed(), p)?,
    };
    Ok(fit.scores())
}

/// Scores on the series and on its time reversal, with their differences.
pub fn trgc_from_series(series: &TimeSeries, p: usize) -> Result<TrgcResult> {
    require_bivariate(series)?;
    trgc_from_channels(series.channel(0), series.channel(1), p)
}

pub(crate) fn trgc_from_channels(x: &[f64], y: &[f64], p: usize) -> Result<TrgcResult> {
    let forward = BivariateFit::new(x, y, p)?.scores();
    let x_rev: Vec<f64> = x.iter().rev().copied().collect();
    let y_rev: Vec<f64> = y.iter().rev().copied().collect();
    let backward = BivariateFit::new(&x_rev, &y_rev, p)?.scores();
    Ok(TrgcResult::from_parts(
        forward,
        backward,
        [RestrictedSource::Estimated; 2],
    ))
}

/// Largest lag used when approximating an infinite-order restricted model.
const LEVINSON_MAX_ORDER: usize = 2000;

/// Population TRGC scores of a stable bivariate model.
///
/// Difference scores use only the full-model residual covariances `Σ` and
/// `Σ̃`, so `d_net_full == d_net`. Restricted variances are exact when a
/// channel does not depend on the other channel's past; otherwise they are
/// the Levinson-Durbin one-step prediction variance of the channel's
/// autocovariance, iterated until it stops changing.
pub fn trgc_analytic(model: &VarModel) -> Result<TrgcResult> {
    if model.dim() != 2 {
        return Err(TrgcError::InvalidInput(format!(
            "analytic TRGC needs a bivariate model, got dimension {}",
            model.dim()
        )));
    }
    let reversed = reverse_varp(model)?;
    let sigma = model.resid_cov();
    let sigma_rev = reversed.resid_cov();

    let mut restricted = [RestrictedSource::Exact; 2];
    let mut restricted_var = [0.0; 2];
    let covs = solve_cross_covariances(model, LEVINSON_MAX_ORDER)?;
    for (c, other) in [(0usize, 1usize), (1, 0)] {
        let closed = model.coeffs().iter().all(|a| a[(c, other)] == 0.0);
        if closed {
            restricted_var[c] = sigma[(c, c)];
        } else {
            let auto: Vec<f64> = covs.lags().iter().map(|m| m[(c, c)]).collect();
            let (var, order) = levinson_prediction_variance(&auto);
            restricted_var[c] = var;
            restricted[c] = RestrictedSource::Approximate { order };
        }
    }

    let forward = GrangerScores::from_variances(
        restricted_var[0],
        restricted_var[1],
        sigma[(0, 0)],
        sigma[(1, 1)],
    );
    let backward = GrangerScores::from_variances(
        restricted_var[0],
        restricted_var[1],
        sigma_rev[(0, 0)],
        sigma_rev[(1, 1)],
    );
    let d_yx = sigma_rev[(0, 0)].ln() - sigma[(0, 0)].ln();
    let d_xy = sigma_rev[(1, 1)].ln() - sigma[(1, 1)].ln();
    let d_net = d_xy - d_yx;
    Ok(TrgcResult {
        forward,
        backward,
        d_yx,
        d_xy,
        d_net,
        d_net_full: d_net,
        restricted,
    })
}

/// One-step prediction error variance from autocovariances `r(0..)`, with
/// the order at which it converged.
fn levinson_prediction_variance(r: &[f64]) -> (f64, usize) {
    let mut err = r[0];
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..r.len() {
        let acc: f64 = phi
            .iter()
            .enumerate()
            .map(|(j, &a)| a * r[k - 1 - j])
            .sum();
        let refl = (r[k] - acc) / err;
        let mut next = phi.clone();
        for j in 0..phi.len() {
            next[j] = phi[j] - refl * phi[phi.len() - 1 - j];
        }
        next.push(refl);
        phi = next;
        let new_err = err * (1.0 - refl * refl);
        if (err - new_err).abs() <= 1e-15 * err {
            return (new_err, k);
        }
        err = new_err;
    }
    (err, r.len() - 1)
}

/// Decision rules for inferring the direction of information flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    StandardGc,
    NetGc,
    ConjTrgc,
    DiffTrgc,
    NetAndDiffTrgc,
    DiffTrgcFull,
}

impl DecisionRule {
    pub const ALL: [DecisionRule; 6] = [
        DecisionRule::StandardGc,
        DecisionRule::NetGc,
        DecisionRule::ConjTrgc,
        DecisionRule::DiffTrgc,
        DecisionRule::NetAndDiffTrgc,
        DecisionRule::DiffTrgcFull,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecisionRule::StandardGc => "standard-gc",
            DecisionRule::NetGc => "net-gc",
            DecisionRule::ConjTrgc => "conj-trgc",
            DecisionRule::DiffTrgc => "diff-trgc",
            DecisionRule::NetAndDiffTrgc => "net-and-diff-trgc",
            DecisionRule::DiffTrgcFull => "diff-trgc-full",
        }
    }

    /// Rules that need bootstrap confidence intervals.
    pub fn needs_bootstrap(&self) -> bool {
        !matches!(self, DecisionRule::StandardGc)
    }
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecisionRule {
    type Err = TrgcError;

    fn from_str(s: &str) -> Result<Self> {
        DecisionRule::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| TrgcError::InvalidInput(format!("unknown method `{s}`")))
    }
}

/// Inferred direction of information flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flow {
    #[serde(rename = "x->y")]
    XToY,
    #[serde(rename = "y->x")]
    YToX,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "none")]
    None,
}

impl Flow {
    pub fn detects_x_to_y(&self) -> bool {
        matches!(self, Flow::XToY | Flow::Both)
    }

    pub fn detects_y_to_x(&self) -> bool {
        matches!(self, Flow::YToX | Flow::Both)
    }

    pub fn any(&self) -> bool {
        !matches!(self, Flow::None)
    }
}

/// Significance inputs the rules draw on. Each rule needs only some of them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Significance {
    pub f_test: Option<FTest>,
    pub f_net: Option<ConfidenceInterval>,
    pub f_net_reversed: Option<ConfidenceInterval>,
    pub d_net: Option<ConfidenceInterval>,
    pub d_net_full: Option<ConfidenceInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub rule: DecisionRule,
    pub flow: Flow,
    /// Point estimates behind the decision, by name.
    pub statistics: Vec<(String, f64)>,
}

/// Sign of a statistic whose interval excludes zero.
fn signed(ci: &ConfidenceInterval) -> i8 {
    if ci.excludes_zero() {
        if ci.lower > 0.0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

fn flow_from_sign(sign: i8) -> Flow {
    match sign {
        1 => Flow::XToY,
        -1 => Flow::YToX,
        _ => Flow::None,
    }
}

fn need<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| TrgcError::MissingSignificance(what.to_string()))
}

/// Applies a decision rule.
///
/// * standard GC: two separate F-tests, possibly `Both`;
/// * Net-GC / Diff-TRGC / Diff-TRGC (full): sign of a statistic whose
///   interval excludes zero;
/// * Conj-TRGC: net score significant and significantly reversed in sign on
///   the time-reversed data;
/// * Net-GC and Diff-TRGC: both significant with the same sign.
pub fn decide(result: &TrgcResult, rule: DecisionRule, significance: &Significance) -> Result<Decision> {
    let (flow, statistics) = match rule {
        DecisionRule::StandardGc => {
            let ft = need(&significance.f_test, "F-tests")?;
            let flow = match (ft.x_to_y.significant, ft.y_to_x.significant) {
                (true, true) => Flow::Both,
                (true, false) => Flow::XToY,
                (false, true) => Flow::YToX,
                (false, false) => Flow::None,
            };
            (
                flow,
                vec![
                    ("F_xy".to_string(), result.forward.f_xy),
                    ("F_yx".to_string(), result.forward.f_yx),
                ],
            )
        }
        DecisionRule::NetGc => {
            let ci = need(&significance.f_net, "F_net interval")?;
            (flow_from_sign(signed(ci)), vec![("F_net".to_string(), result.forward.f_net)])
        }
        DecisionRule::DiffTrgc => {
            let ci = need(&significance.d_net, "D_net interval")?;
            (flow_from_sign(signed(ci)), vec![("D_net".to_string(), result.d_net)])
        }
        DecisionRule::DiffTrgcFull => {
            let ci = need(&significance.d_net_full, "D_net_full interval")?;
            (
                flow_from_sign(signed(ci)),
                vec![("D_net_full".to_string(), result.d_net_full)],
            )
        }
        DecisionRule::ConjTrgc => {
            let fwd = signed(need(&significance.f_net, "F_net interval")?);
            let bwd = signed(need(&significance.f_net_reversed, "Ftil_net interval")?);
            let sign = if fwd != 0 && bwd == -fwd { fwd } else { 0 };
            (
                flow_from_sign(sign),
                vec![
                    ("F_net".to_string(), result.forward.f_net),
                    ("Ftil_net".to_string(), result.backward.f_net),
                ],
            )
        }
        DecisionRule::NetAndDiffTrgc => {
            let net = signed(need(&significance.f_net, "F_net interval")?);
            let diff = signed(need(&significance.d_net, "D_net interval")?);
            let sign = if net != 0 && net == diff { net } else { 0 };
            (
                flow_from_sign(sign),
                vec![
                    ("F_net".to_string(), result.forward.f_net),
                    ("D_net".to_string(), result.d_net),
                ],
            )
        }
    };
    Ok(Decision {
        rule,
        flow,
        statistics,
    })
}
