//! Simulation scenarios and the Monte-Carlo experiment runner that tallies
//! true and false positive rates of the decision rules.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, TrgcError};
use crate::granger::{decide, trgc_from_series, DecisionRule, Flow, Significance};
use crate::inference::{bootstrap, f_test_gc, select_order_bic, BootstrapSpec};
use crate::seed::derive_tagged;
use crate::var::{check_stability, simulate, TimeSeries, VarModel};

/// Spectral radius accepted when drawing random models.
pub const MAX_DRAW_RADIUS: f64 = 0.97;
/// Draws attempted before giving up on finding a stable random model.
pub const DRAW_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    NoiselessUnidir,
    LinearMixing,
    HiddenCause,
    AdditiveNoise,
    LongMemory,
    Downsample,
    Aggregate,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::NoiselessUnidir => "noiseless-unidir",
            ScenarioKind::LinearMixing => "linear-mixing",
            ScenarioKind::HiddenCause => "hidden-cause",
            ScenarioKind::AdditiveNoise => "additive-noise",
            ScenarioKind::LongMemory => "long-memory",
            ScenarioKind::Downsample => "downsample",
            ScenarioKind::Aggregate => "aggregate",
        }
    }

    fn default_sigma_a(&self) -> f64 {
        match self {
            ScenarioKind::HiddenCause | ScenarioKind::Downsample | ScenarioKind::Aggregate => 0.3,
            _ => 0.2,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    IndependentWhite,
    MixedWhite,
    MixedAutocorrelated,
}

fn default_t() -> usize {
    2000
}
fn default_p_gen() -> usize {
    5
}
fn default_true() -> bool {
    true
}
fn default_tau() -> usize {
    1
}
fn default_n_reps() -> usize {
    100
}

/// Parameters of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "default_t")]
    pub t: usize,
    #[serde(default = "default_p_gen")]
    pub p_gen: usize,
    /// Standard deviation of random AR coefficients; scenario default if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_a: Option<f64>,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_kind: Option<NoiseKind>,
    /// Whether the latent pair is coupled `x → y`. Applies to the
    /// unidirectional, additive-noise and decimation scenarios.
    #[serde(default = "default_true")]
    pub interacting: bool,
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            t: default_t(),
            p_gen: default_p_gen(),
            sigma_a: None,
            gamma: 0.0,
            noise_kind: None,
            interacting: true,
            tau: 1,
            n_reps: default_n_reps(),
            seed: 0,
        }
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a.unwrap_or_else(|| self.scenario.default_sigma_a())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TrgcError::Config(m));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.tau == 0 {
            return bad("tau must be at least 1".into());
        }
        if self.t == 0 || self.p_gen == 0 {
            return bad("t and p_gen must be positive".into());
        }
        if !(self.sigma_a() >= 0.0) {
            return bad("sigma_a must be non-negative".into());
        }
        let kind = self.scenario;
        if self.noise_kind.is_some() && kind != ScenarioKind::AdditiveNoise {
            return bad(format!("noise_kind is not valid for scenario {kind}"));
        }
        if kind == ScenarioKind::AdditiveNoise && self.noise_kind.is_none() {
            return bad("additive-noise requires noise_kind".into());
        }
        if self.tau != 1 && !matches!(kind, ScenarioKind::Downsample | ScenarioKind::Aggregate) {
            return bad(format!("tau is not valid for scenario {kind}"));
        }
        if self.gamma != 0.0 && !matches!(kind, ScenarioKind::AdditiveNoise | ScenarioKind::LongMemory) {
            return bad(format!("gamma is not valid for scenario {kind}"));
        }
        Ok(())
    }

    /// Direction of information flow built into the generator.
    pub fn ground_truth(&self) -> Flow {
        match self.scenario {
            ScenarioKind::LinearMixing | ScenarioKind::HiddenCause => Flow::None,
            ScenarioKind::LongMemory => {
                if self.gamma < 1.0 {
                    Flow::XToY
                } else {
                    Flow::None
                }
            }
            ScenarioKind::AdditiveNoise => {
                if self.interacting && self.gamma < 1.0 {
                    Flow::XToY
                } else {
                    Flow::None
                }
            }
            ScenarioKind::NoiselessUnidir | ScenarioKind::Downsample | ScenarioKind::Aggregate => {
                if self.interacting {
                    Flow::XToY
                } else {
                    Flow::None
                }
            }
        }
    }

    fn burn_in(&self, p: usize) -> usize {
        10 * p * self.tau
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct Generated {
    pub series: TimeSeries,
    pub truth: Flow,
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Random stable VAR(p): coefficients `N(0, σ_A²)` with entries where
/// `keep(h, i, j)` is false set to zero, diagonal residual covariance with
/// `Uniform(0, 1)` variances. Rejection-sampled until the spectral radius is
/// below [`MAX_DRAW_RADIUS`].
pub fn random_var<R: Rng + ?Sized>(
    d: usize,
    p: usize,
    sigma_a: f64,
    keep: impl Fn(usize, usize, usize) -> bool,
    rng: &mut R,
) -> Result<VarModel> {
    for _ in 0..DRAW_BUDGET {
        let coeffs: Vec<DMatrix<f64>> = (0..p)
            .map(|h| {
                DMatrix::from_fn(d, d, |i, j| {
                    let v = sigma_a * normal(rng);
                    if keep(h, i, j) {
                        v
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let variances: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let model = VarModel::new(coeffs, DMatrix::from_diagonal(&variances.into()))?;
        let stability = check_stability(&model);
        if stability.spectral_radius < MAX_DRAW_RADIUS {
            return Ok(model);
        }
    }
    Err(TrgcError::RejectionBudget {
        attempts: DRAW_BUDGET,
    })
}

/// Gaussian `d × d` matrix scaled to `|det| = 1`, sign kept.
pub fn random_unit_det_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    for _ in 0..DRAW_BUDGET {
        let m = DMatrix::from_fn(d, d, |_, _| normal(rng));
        let det = m.determinant();
        if det.abs() > 1e-3 {
            return Ok(m / det.abs().powf(1.0 / d as f64));
        }
    }
    Err(TrgcError::RejectionBudget {
        attempts: DRAW_BUDGET,
    })
}

fn unidirectional_model<R: Rng + ?Sized>(p: usize, sigma_a: f64, interacting: bool, rng: &mut R) -> Result<VarModel> {
    // channel 0 = x, channel 1 = y; entry (0, 1) would be y → x
    random_var(2, p, sigma_a, |_, i, j| i == j || (interacting && i == 1 && j == 0), rng)
}

fn mix(series: &TimeSeries, m: &DMatrix<f64>) -> Result<TimeSeries> {
    TimeSeries::new(series.data() * m.transpose(), series.names().to_vec())
}

fn combine(latent: &TimeSeries, noise: &TimeSeries, gamma: f64) -> Result<TimeSeries> {
    TimeSeries::new(
        latent.data() * (1.0 - gamma) + noise.data() * gamma,
        latent.names().to_vec(),
    )
}

fn white_noise<R: Rng + ?Sized>(t: usize, d: usize, rng: &mut R) -> Result<TimeSeries> {
    let sd: Vec<f64> = (0..d).map(|_| rng.random::<f64>().sqrt()).collect();
    let columns: Vec<Vec<f64>> = sd.iter().map(|s| (0..t).map(|_| s * normal(rng)).collect()).collect();
    TimeSeries::from_columns(&columns)
}

/// Unidirectional `x → y` VAR(p_gen) data, or two independent AR channels
/// when `interacting` is false.
pub fn gen_unidirectional<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    let model = unidirectional_model(cfg.p_gen, cfg.sigma_a(), cfg.interacting, rng)?;
    let series = simulate(&model, cfg.t, rng, cfg.burn_in(cfg.p_gen))?;
    Ok(Generated {
        series,
        truth: cfg.ground_truth(),
    })
}

/// Random unit-determinant mixture of two independent AR(p_gen) sources.
pub fn gen_mixing<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    let model = unidirectional_model(cfg.p_gen, cfg.sigma_a(), false, rng)?;
    let sources = simulate(&model, cfg.t, rng, cfg.burn_in(cfg.p_gen))?;
    let m = random_unit_det_matrix(2, rng)?;
    Ok(Generated {
        series: mix(&sources, &m)?,
        truth: Flow::None,
    })
}

/// Three-channel VAR(p_gen) in which a hidden channel `g` drives both `x`
/// and `y`; only `(x, y)` is returned.
pub fn gen_hidden_cause<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    let model = random_var(3, cfg.p_gen, cfg.sigma_a(), |_, i, j| !(i < 2 && j < 2 && i != j), rng)?;
    let full = simulate(&model, cfg.t, rng, cfg.burn_in(cfg.p_gen))?;
    Ok(Generated {
        series: full.select(&[0, 1])?,
        truth: Flow::None,
    })
}

/// `(1 − γ)·latent + γ·η` with latent either coupled `x → y` or two
/// independent AR processes.
pub fn gen_additive_noise<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    let kind = cfg.noise_kind.ok_or_else(|| TrgcError::Config("additive-noise requires noise_kind".into()))?;
    let latent_model = unidirectional_model(cfg.p_gen, cfg.sigma_a(), cfg.interacting, rng)?;
    let latent = simulate(&latent_model, cfg.t, rng, cfg.burn_in(cfg.p_gen))?;
    let noise = match kind {
        NoiseKind::IndependentWhite => white_noise(cfg.t, 2, rng)?,
        NoiseKind::MixedWhite => {
            let b = random_unit_det_matrix(2, rng)?;
            mix(&white_noise(cfg.t, 2, rng)?, &b)?
        }
        NoiseKind::MixedAutocorrelated => {
            let b = random_unit_det_matrix(2, rng)?;
            let noise_model = unidirectional_model(cfg.p_gen, cfg.sigma_a(), false, rng)?;
            let sources = simulate(&noise_model, cfg.t, rng, cfg.burn_in(cfg.p_gen))?;
            mix(&sources, &b)?
        }
    };
    Ok(Generated {
        series: combine(&latent, &noise, cfg.gamma)?,
        truth: cfg.ground_truth(),
    })
}

/// The long-memory VAR(1) `A = [[0.95, 0], [1, 0.5]]`, `Σ = I`.
pub fn long_memory_model() -> VarModel {
    VarModel::new(
        vec![DMatrix::from_row_slice(2, 2, &[0.95, 0.0, 1.0, 0.5])],
        DMatrix::identity(2, 2),
    )
    .expect("valid constant model")
}

/// Long-memory system with unit white noise added to `x` only.
pub fn gen_long_memory<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    let latent = simulate(&long_memory_model(), cfg.t, rng, cfg.burn_in(1))?;
    let gamma = cfg.gamma;
    let x: Vec<f64> = latent
        .channel(0)
        .iter()
        .map(|v| (1.0 - gamma) * v + gamma * normal(rng))
        .collect();
    let series = TimeSeries::from_columns(&[x, latent.channel(1).to_vec()])?;
    Ok(Generated {
        series,
        truth: cfg.ground_truth(),
    })
}

/// Every `tau`-th sample, starting with the first.
pub fn downsample(series: &TimeSeries, tau: usize) -> Result<TimeSeries> {
    if tau == 0 {
        return Err(TrgcError::InvalidInput("tau must be at least 1".into()));
    }
    let rows: Vec<usize> = (0..series.len()).step_by(tau).collect();
    let data = DMatrix::from_fn(rows.len(), series.dim(), |r, c| series.data()[(rows[r], c)]);
    Ok(TimeSeries::new(data, series.names().to_vec())?.with_seed(series.seed))
}

/// Means of consecutive non-overlapping blocks of `tau` samples; an
/// incomplete final block is dropped.
pub fn aggregate(series: &TimeSeries, tau: usize) -> Result<TimeSeries> {
    if tau == 0 {
        return Err(TrgcError::InvalidInput("tau must be at least 1".into()));
    }
    let n = series.len() / tau;
    if n == 0 {
        return Err(TrgcError::InsufficientData {
            needed: tau,
            got: series.len(),
        });
    }
    let data = DMatrix::from_fn(n, series.dim(), |r, c| {
        (0..tau).map(|k| series.data()[(r * tau + k, c)]).sum::<f64>() / tau as f64
    });
    Ok(TimeSeries::new(data, series.names().to_vec())?.with_seed(series.seed))
}

fn gen_decimated<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R, averaged: bool) -> Result<Generated> {
    let model = unidirectional_model(cfg.p_gen, cfg.sigma_a(), cfg.interacting, rng)?;
    let raw = simulate(&model, cfg.t * cfg.tau, rng, cfg.burn_in(cfg.p_gen))?;
    let series = if averaged {
        aggregate(&raw, cfg.tau)?
    } else {
        downsample(&raw, cfg.tau)?
    };
    Ok(Generated {
        series,
        truth: cfg.ground_truth(),
    })
}

/// One dataset of the configured scenario.
pub fn generate<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Generated> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::NoiselessUnidir => gen_unidirectional(cfg, rng),
        ScenarioKind::LinearMixing => gen_mixing(cfg, rng),
        ScenarioKind::HiddenCause => gen_hidden_cause(cfg, rng),
        ScenarioKind::AdditiveNoise => gen_additive_noise(cfg, rng),
        ScenarioKind::LongMemory => gen_long_memory(cfg, rng),
        ScenarioKind::Downsample => gen_decimated(cfg, rng, false),
        ScenarioKind::Aggregate => gen_decimated(cfg, rng, true),
    }
}

/// Lag order used for scoring: fixed, or chosen by BIC per dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSelection {
    Fixed(usize),
    Bic,
}

impl FromStr for OrderSelection {
    type Err = TrgcError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("bic") {
            return Ok(OrderSelection::Bic);
        }
        match s.parse::<usize>() {
            Ok(p) if p >= 1 => Ok(OrderSelection::Fixed(p)),
            _ => Err(TrgcError::InvalidInput(format!("order must be a positive integer or `bic`, got `{s}`"))),
        }
    }
}

impl fmt::Display for OrderSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderSelection::Fixed(p) => write!(f, "{p}"),
            OrderSelection::Bic => f.write_str("bic"),
        }
    }
}

impl Serialize for OrderSelection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OrderSelection::Fixed(p) => s.serialize_u64(*p as u64),
            OrderSelection::Bic => s.serialize_str("bic"),
        }
    }
}

impl<'de> Deserialize<'de> for OrderSelection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => OrderSelection::from_str(&p.to_string()),
            Raw::Str(s) => OrderSelection::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn default_order() -> OrderSelection {
    OrderSelection::Bic
}
fn default_p_max() -> usize {
    10
}
fn default_alpha() -> f64 {
    0.05
}
fn default_n_boot() -> usize {
    500
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    #[serde(default = "default_order")]
    pub order: OrderSelection,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            order: default_order(),
            p_max: default_p_max(),
            alpha: default_alpha(),
            n_boot: default_n_boot(),
        }
    }
}

impl InferenceConfig {
    pub fn resolve_order(&self, series: &TimeSeries) -> Result<usize> {
        match self.order {
            OrderSelection::Fixed(p) => Ok(p),
            OrderSelection::Bic => select_order_bic(series, self.p_max),
        }
    }
}

/// Scenario parameter varied across conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Gamma,
    T,
    SigmaA,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_methods() -> Vec<DecisionRule> {
    vec![DecisionRule::StandardGc, DecisionRule::NetGc, DecisionRule::DiffTrgc]
}

/// A complete experiment: scenario, inference settings, methods and an
/// optional one-parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    #[serde(default = "default_methods")]
    pub methods: Vec<DecisionRule>,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            scenario,
            methods: default_methods(),
            inference: InferenceConfig::default(),
            sweep: None,
        }
    }

    /// `(label, scenario)` for every condition of the sweep.
    pub fn conditions(&self) -> Result<Vec<(String, ScenarioConfig)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![("base".to_string(), self.scenario.clone())]);
        };
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(TrgcError::Config(format!("{what} sweep values must be positive integers, got {v}")))
            }
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut cfg = self.scenario.clone();
                let label = match sweep.param {
                    SweepParam::Gamma => {
                        cfg.gamma = v;
                        format!("gamma={v}")
                    }
                    SweepParam::SigmaA => {
                        cfg.sigma_a = Some(v);
                        format!("sigma_a={v}")
                    }
                    SweepParam::T => {
                        cfg.t = as_count(v, "t")?;
                        format!("t={}", cfg.t)
                    }
                    SweepParam::Tau => {
                        cfg.tau = as_count(v, "tau")?;
                        format!("tau={}", cfg.tau)
                    }
                };
                cfg.validate()?;
                Ok((label, cfg))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.methods.is_empty() {
            return Err(TrgcError::Config("at least one method is required".into()));
        }
        let spec = BootstrapSpec {
            n_boot: self.inference.n_boot,
            alpha: self.inference.alpha,
            ..Default::default()
        };
        if self.methods.iter().any(DecisionRule::needs_bootstrap) {
            spec.validate().map_err(|e| TrgcError::Config(e.to_string()))?;
        }
        if !(self.inference.alpha > 0.0 && self.inference.alpha < 1.0) {
            return Err(TrgcError::Config("alpha must lie in (0, 1)".into()));
        }
        self.conditions().map(|_| ())
    }
}

/// Tallies of one method under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTally {
    pub scenario: ScenarioKind,
    pub method: DecisionRule,
    pub condition: String,
    pub tp: usize,
    pub fp: usize,
    /// Repetitions that completed; the rate denominator.
    pub n: usize,
    pub failures: usize,
    pub tpr: f64,
    pub fpr: f64,
}

/// Outcome of one repetition: the flow each method inferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub seed: u64,
    pub order: usize,
    pub flows: Vec<Flow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: String,
    pub truth: Flow,
    pub seeds: Vec<u64>,
    pub failures: Vec<(u64, String)>,
    pub tallies: Vec<MethodTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub conditions: Vec<ConditionResult>,
}

impl ExperimentResult {
    pub fn tallies(&self) -> impl Iterator<Item = &MethodTally> {
        self.conditions.iter().flat_map(|c| c.tallies.iter())
    }

    /// Tally of `method` under `condition`.
    pub fn tally(&self, method: DecisionRule, condition: &str) -> Option<&MethodTally> {
        self.tallies().find(|t| t.method == method && t.condition == condition)
    }
}

/// Whether `flow` is a true and/or a false positive given `truth`.
/// Standard GC may report both directions, which then counts as both.
pub fn classify(flow: Flow, truth: Flow) -> (bool, bool) {
    match truth {
        Flow::XToY => (flow.detects_x_to_y(), flow.detects_y_to_x()),
        Flow::YToX => (flow.detects_y_to_x(), flow.detects_x_to_y()),
        Flow::None | Flow::Both => (false, flow.any()),
    }
}

/// Generates and analyzes one repetition.
pub fn run_repetition(
    cfg: &ScenarioConfig,
    methods: &[DecisionRule],
    inference: &InferenceConfig,
    seed: u64,
) -> Result<RepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_tagged(seed, "data", 0));
    let generated = generate(cfg, &mut rng)?;
    let series = generated.series;
    let p = inference.resolve_order(&series)?;

    let mut significance = Significance::default();
    if methods.contains(&DecisionRule::StandardGc) {
        significance.f_test = Some(f_test_gc(&series, p, inference.alpha)?);
    }
    let result = if methods.iter().any(DecisionRule::needs_bootstrap) {
        let spec = BootstrapSpec {
            n_boot: inference.n_boot,
            alpha: inference.alpha,
            seed: derive_tagged(seed, "bootstrap", 0),
            ..Default::default()
        };
        let dist = bootstrap(&series, p, &spec)?;
        let boot = dist.significance(inference.alpha);
        significance = Significance {
            f_test: significance.f_test,
            ..boot
        };
        dist.estimate
    } else {
        trgc_from_series(&series, p)?
    };
    let flows = methods
        .iter()
        .map(|&m| decide(&result, m, &significance).map(|d| d.flow))
        .collect::<Result<_>>()?;
    Ok(RepOutcome { seed, order: p, flows })
}

/// Runs every condition of the experiment. Repetition `r` of condition
/// `c` uses a seed derived from the configured seed, `c` and `r`, so the
/// tables do not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let conditions = config.conditions()?;
    let mut out = Vec::with_capacity(conditions.len());
    for (ci, (label, cfg)) in conditions.into_iter().enumerate() {
        let condition_seed = derive_tagged(cfg.seed, "condition", ci as u64);
        let seeds: Vec<u64> = (0..cfg.n_reps as u64)
            .map(|r| derive_tagged(condition_seed, "rep", r))
            .collect();
        let outcomes: Vec<Result<RepOutcome>> = seeds
            .par_iter()
            .map(|&s| run_repetition(&cfg, &config.methods, &config.inference, s))
            .collect();

        let truth = cfg.ground_truth();
        let mut failures = Vec::new();
        let mut ok = Vec::new();
        for (s, o) in seeds.iter().zip(outcomes) {
            match o {
                Ok(o) => ok.push(o),
                Err(e) => failures.push((*s, e.to_string())),
            }
        }
        let tallies = config
            .methods
            .iter()
            .enumerate()
            .map(|(k, &method)| {
                let (mut tp, mut fp) = (0, 0);
                for o in &ok {
                    let (t, f) = classify(o.flows[k], truth);
                    tp += t as usize;
                    fp += f as usize;
                }
                let n = ok.len();
                let rate = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
                MethodTally {
                    scenario: cfg.scenario,
                    method,
                    condition: label.clone(),
                    tp,
                    fp,
                    n,
                    failures: failures.len(),
                    tpr: rate(tp),
                    fpr: rate(fp),
                }
            })
            .collect();
        out.push(ConditionResult {
            condition: label,
            truth,
            seeds,
            failures,
            tallies,
        });
    }
    Ok(ExperimentResult {
        config: config.clone(),
        conditions: out,
    })
}
