use thiserror::Error;

/// Errors raised by models, smoothers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("filter collapsed at t = {t}: every particle weight is zero")]
    FilterCollapse { t: usize },

    #[error("grid does not cover the posterior mass at t = {t}")]
    GridCoverage { t: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("rejection envelope violated: acceptance probability {probability} exceeds 1")]
    EnvelopeViolation { probability: f64 },

    #[error("rejection sampler gave up after {attempts} attempts")]
    RejectionCap { attempts: u64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("repetition {index}: {source}")]
    Repetition { index: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by invalid configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Repetition { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
