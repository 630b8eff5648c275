use thiserror::Error;

/// Errors produced by the distribution, model and sampler layers.
#[derive(Debug, Error)]
pub enum GalorError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sampler aborted at iteration {iteration} in block `{block}`: {reason}")]
    ChainAborted {
        iteration: usize,
        block: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GalorError>;

pub(crate) fn domain(msg: impl Into<String>) -> GalorError {
    GalorError::Domain(msg.into())
}
