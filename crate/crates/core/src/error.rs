use thiserror::Error;

/// Errors produced by the analysis, simulation and ingestion routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{what} = {value} out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} vs {right}")]
    Shape { left: usize, right: usize },

    #[error("support mismatch at index {index}: P > 0 where Q = 0")]
    Support { index: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid tag: {0:?}")]
    InvalidTag(String),

    #[error("invalid stream: {0}")]
    InvalidStream(String),

    #[error("ingestion error at row {row}: {reason}")]
    Ingestion { row: usize, reason: String },

    #[error("ingestion error: {0}")]
    NoData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
