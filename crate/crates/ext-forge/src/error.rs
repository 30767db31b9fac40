use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The input does not satisfy the hypotheses of the statement requested.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// A self-check that should never fail did fail.
    #[error("internal consistency failure: {0}")]
    Internal(String),
    /// The request is well-formed but the available data cannot answer it.
    #[error("refused: {0}")]
    Refused(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
