//! File formats: time-series CSV, model / structural-model JSON, experiment
//! configuration TOML and result tables, plus the single-dataset analysis
//! report.
//!
//! Floating-point values are written in shortest round-trip form, so
//! reading a file back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrgcError};
use crate::granger::{decide, DecisionRule, Flow, ScoreReport, Significance};
use crate::inference::{bootstrap, f_test_gc, BootstrapSpec, ConfidenceInterval, FTest, Statistic};
use crate::scenarios::{ExperimentConfig, ExperimentResult, InferenceConfig, OrderSelection};
use crate::structural::{mixture_to_var, svar_to_var, MixtureModel, SvarModel};
use crate::var::{TimeSeries, VarModel};

/// Writes `# seed=…` (when known), a `t,<names>` header and one row per
/// sample.
pub fn write_series_csv<W: Write>(series: &TimeSeries, mut w: W) -> Result<()> {
    if let Some(seed) = series.seed {
        writeln!(w, "# seed={seed}")?;
    }
    writeln!(w, "t,{}", series.names().join(","))?;
    let data = series.data();
    let mut line = String::new();
    for t in 0..series.len() {
        line.clear();
        line.push_str(&t.to_string());
        for c in 0..series.dim() {
            line.push(',');
            line.push_str(&data[(t, c)].to_string());
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a series written by [`write_series_csv`]. Lines starting with `#`
/// are comments; a `# seed=N` comment sets the seed. The first column must
/// be `t` and is ignored.
pub fn read_series_csv<R: BufRead>(r: R) -> Result<TimeSeries> {
    let mut seed = None;
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("seed=") {
                seed = Some(
                    v.trim()
                        .parse()
                        .map_err(|_| TrgcError::Schema(format!("invalid seed comment `{line}`")))?,
                );
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match &header {
            None => {
                if fields.first() != Some(&"t") {
                    return Err(TrgcError::Schema("first column must be `t`".into()));
                }
                if fields.len() < 2 {
                    return Err(TrgcError::Schema("no data columns".into()));
                }
                header = Some(fields[1..].iter().map(|s| s.to_string()).collect());
                columns = vec![Vec::new(); fields.len() - 1];
            }
            Some(names) => {
                if fields.len() != names.len() + 1 {
                    return Err(TrgcError::Schema(format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        names.len() + 1,
                        fields.len()
                    )));
                }
                for (col, f) in columns.iter_mut().zip(&fields[1..]) {
                    col.push(f.parse().map_err(|_| {
                        TrgcError::Schema(format!("line {}: invalid number `{f}`", lineno + 1))
                    })?);
                }
            }
        }
    }
    let names = header.ok_or_else(|| TrgcError::Schema("missing header".into()))?;
    if columns[0].is_empty() {
        return Err(TrgcError::Schema("no data rows".into()));
    }
    Ok(TimeSeries::from_columns(&columns)?
        .with_names(names)?
        .with_seed(seed))
}

/// The `(x, y)` channels of a series, by column name.
pub fn select_xy(series: &TimeSeries) -> Result<TimeSeries> {
    let find = |name: &str| {
        series
            .names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| TrgcError::Schema(format!("missing column `{name}`")))
    };
    let idx = [find("x")?, find("y")?];
    Ok(series.select(&idx)?.with_seed(series.seed))
}

type Rows = Vec<Vec<f64>>;

fn to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: &Rows, what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(TrgcError::Schema(format!("`{what}` must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// `{p, d, A, Sigma}` with matrices as row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub p: usize,
    pub d: usize,
    #[serde(rename = "A")]
    pub a: Vec<Rows>,
    #[serde(rename = "Sigma")]
    pub sigma: Rows,
}

impl From<&VarModel> for ModelJson {
    fn from(m: &VarModel) -> Self {
        Self {
            p: m.order(),
            d: m.dim(),
            a: m.coeffs().iter().map(to_rows).collect(),
            sigma: to_rows(m.resid_cov()),
        }
    }
}

impl TryFrom<&ModelJson> for VarModel {
    type Error = TrgcError;

    fn try_from(j: &ModelJson) -> Result<Self> {
        if j.a.len() != j.p {
            return Err(TrgcError::Schema(format!("p = {} but {} coefficient matrices", j.p, j.a.len())));
        }
        let coeffs = j
            .a
            .iter()
            .map(|a| from_rows(a, "A"))
            .collect::<Result<Vec<_>>>()?;
        let sigma = from_rows(&j.sigma, "Sigma")?;
        if sigma.nrows() != j.d {
            return Err(TrgcError::Schema(format!("d = {} but Sigma is {}x{}", j.d, sigma.nrows(), sigma.ncols())));
        }
        VarModel::new(coeffs, sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvarJson {
    #[serde(rename = "Gamma0")]
    pub gamma0: Rows,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<Rows>,
    #[serde(rename = "Sigma")]
    pub sigma: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureJson {
    #[serde(rename = "M")]
    pub m: Rows,
    #[serde(rename = "B")]
    pub b: Vec<Rows>,
    #[serde(rename = "Sigma")]
    pub sigma: Rows,
}

/// A structural model file: SVAR (`Gamma0`) or mixture (`M`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructuralJson {
    Svar(SvarJson),
    Mixture(MixtureJson),
}

impl StructuralJson {
    pub fn to_var(&self) -> Result<VarModel> {
        match self {
            StructuralJson::Svar(s) => {
                let gammas = s.gamma.iter().map(|g| from_rows(g, "Gamma")).collect::<Result<_>>()?;
                let svar = SvarModel::new(from_rows(&s.gamma0, "Gamma0")?, gammas, from_rows(&s.sigma, "Sigma")?)?;
                svar_to_var(&svar)
            }
            StructuralJson::Mixture(m) => {
                let b = m.b.iter().map(|b| from_rows(b, "B")).collect::<Result<_>>()?;
                let latent = VarModel::new(b, from_rows(&m.sigma, "Sigma")?)?;
                mixture_to_var(&MixtureModel::new(from_rows(&m.m, "M")?, latent)?)
            }
        }
    }
}

pub fn parse_model_json(text: &str) -> Result<VarModel> {
    let j: ModelJson = serde_json::from_str(text).map_err(|e| TrgcError::Schema(format!("model JSON: {e}")))?;
    VarModel::try_from(&j)
}

pub fn model_to_json(model: &VarModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelJson::from(model))?)
}

pub fn parse_structural_json(text: &str) -> Result<StructuralJson> {
    serde_json::from_str(text).map_err(|_| {
        TrgcError::Schema("expected an SVAR (`Gamma0`, `Gamma`, `Sigma`) or mixture (`M`, `B`, `Sigma`) object".into())
    })
}

/// Parses an experiment configuration (TOML).
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| TrgcError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Experiment results with the configuration text they were produced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_text: String,
    #[serde(flatten)]
    pub result: ExperimentResult,
}

/// `scenario,method,condition,tpr,fpr,n`, one row per method and condition.
pub fn write_results_csv<W: Write>(result: &ExperimentResult, mut w: W) -> Result<()> {
    writeln!(w, "scenario,method,condition,tpr,fpr,n")?;
    for t in result.tallies() {
        writeln!(w, "{},{},{},{},{},{}", t.scenario, t.method, t.condition, t.tpr, t.fpr, t.n)?;
    }
    w.flush()?;
    Ok(())
}

/// Analysis settings for a single dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub inference: InferenceConfig,
    pub methods: Vec<DecisionRule>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodDecision {
    pub method: DecisionRule,
    pub flow: Flow,
}

/// Scores, significance and decisions for one bivariate dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub p: usize,
    pub order: String,
    pub alpha: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub scores: ScoreReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_test: Option<FTest>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub intervals: BTreeMap<String, ConfidenceInterval>,
    pub decisions: Vec<MethodDecision>,
}

fn statistic_key(s: Statistic) -> &'static str {
    match s {
        Statistic::FNet => "F_net",
        Statistic::FNetReversed => "Ftil_net",
        Statistic::DNet => "D_net",
        Statistic::DNetFull => "D_net_full",
    }
}

/// Scores the `(x, y)` pair, runs the tests the methods need and applies
/// every method.
pub fn analyze(series: &TimeSeries, settings: &AnalysisSettings) -> Result<AnalysisReport> {
    let series = select_xy(series)?;
    let inf = &settings.inference;
    let p = inf.resolve_order(&series)?;
    let mut significance = Significance::default();
    let mut intervals = BTreeMap::new();
    if settings.methods.contains(&DecisionRule::StandardGc) {
        significance.f_test = Some(f_test_gc(&series, p, inf.alpha)?);
    }
    let result = if settings.methods.iter().any(DecisionRule::needs_bootstrap) {
        let spec = BootstrapSpec {
            n_boot: inf.n_boot,
            alpha: inf.alpha,
            seed: settings.seed,
            ..Default::default()
        };
        let dist = bootstrap(&series, p, &spec)?;
        for s in Statistic::ALL {
            intervals.insert(statistic_key(s).to_string(), dist.interval(s, inf.alpha));
        }
        significance = Significance {
            f_test: significance.f_test,
            ..dist.significance(inf.alpha)
        };
        dist.estimate
    } else {
        crate::granger::trgc_from_series(&series, p)?
    };
    let decisions = settings
        .methods
        .iter()
        .map(|&m| {
            decide(&result, m, &significance).map(|d| MethodDecision {
                method: m,
                flow: d.flow,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnalysisReport {
        p,
        order: match inf.order {
            OrderSelection::Bic => "bic".into(),
            OrderSelection::Fixed(_) => "fixed".into(),
        },
        alpha: inf.alpha,
        seed: settings.seed,
        scores: ScoreReport::from(&result),
        f_test: significance.f_test,
        intervals,
        decisions,
    })
}
