use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("expansion coefficient undefined: c = {0:e}")]
    Degenerate(f64),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("level {level} not reached within time cap {cap} after {attempts} steps")]
    RareEvent { level: f64, cap: f64, attempts: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("all weights are numerically zero")]
    DegenerateWeights,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit error: {0}")]
    Fit(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
