use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant maps to a stable, machine-readable category string via
/// [`TrgcError::category`], which the CLI prints alongside the message.
#[derive(Debug, Error)]
pub enum TrgcError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model is not stable (spectral radius {radius:.6})")]
    Unstable { radius: f64 },

    #[error("{what} is singular or ill-conditioned (condition number {cond:.3e})")]
    Singular { what: &'static str, cond: f64 },

    #[error("regressor matrix is rank deficient ({0})")]
    RankDeficient(String),

    #[error("insufficient data: need more than {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("stable model rejection sampling gave up after {attempts} attempts")]
    RejectionBudget { attempts: usize },

    #[error("missing significance input: {0}")]
    MissingSignificance(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl TrgcError {
    pub fn category(&self) -> &'static str {
        match self {
            TrgcError::InvalidInput(_) => "invalid-input",
            TrgcError::Unstable { .. } => "unstable-model",
            TrgcError::Singular { .. } => "singular-matrix",
            TrgcError::RankDeficient(_) => "rank-deficient",
            TrgcError::InsufficientData { .. } => "insufficient-data",
            TrgcError::RejectionBudget { .. } => "rejection-budget",
            TrgcError::MissingSignificance(_) => "missing-significance",
            TrgcError::Schema(_) => "schema",
            TrgcError::Internal(_) => "internal",
            TrgcError::Io(_) => "io",
            TrgcError::Json(_) => "json",
            TrgcError::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, TrgcError>;
