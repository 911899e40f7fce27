use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("inconsistent state: {0}")]
    State(String),

    #[error("non-finite value in {0}")]
    Numeric(String),

    #[error("training diverged for class {class_id} at epoch {epoch}")]
    Training { class_id: usize, epoch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("class {class_id} is degenerate: {reason}")]
    DegenerateClass { class_id: usize, reason: String },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage, 3 data/format, 4 numeric/training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            Error::Shape { .. }
            | Error::DegenerateClass { .. }
            | Error::Format { .. }
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Json(_) => 3,
            Error::State(_) | Error::Numeric(_) | Error::Training { .. } => 4,
        }
    }
}
