use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("unknown {kind} id {id}")]
    Lookup { kind: &'static str, id: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grid cell (sample_size={sample_size}, algorithm={algorithm}, lr={learning_rate}) failed: {source}")]
    Cell {
        sample_size: usize,
        algorithm: String,
        learning_rate: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for errors caused by the input data rather than by the caller's
    /// configuration or the environment.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::Integrity(_)
            | Error::Lookup { .. }
            | Error::Dimension { .. }
            | Error::Degenerate(_)
            | Error::Json(_) => true,
            Error::Cell { source, .. } => source.is_data_error(),
            _ => false,
        }
    }

    pub fn is_usage_error(&self) -> bool {
        match self {
            Error::Config(_) | Error::Bounds(_) => true,
            Error::Cell { source, .. } => source.is_usage_error(),
            _ => false,
        }
    }
}
