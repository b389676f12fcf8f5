use thiserror::Error;

/// Errors produced by score ingestion, estimation and the validation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid scores: {0}")]
    Validation(String),

    #[error("task `{0}` is not covered by the normalization spec")]
    MissingTask(String),

    #[error("normalization for task `{0}` has high == low")]
    DegenerateNormalization(String),

    #[error("task sets do not match: {0}")]
    TaskMismatch(String),

    #[error("invalid experiment config at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("statistic failed on replicate {replicate}: {source}")]
    Statistic {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
