use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("dimension mismatch: expected order {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("missing input for order {order}: {what}")]
    Dependency { order: usize, what: String },

    #[error("I/O error at level {level:?}, shard {shard:?}, path {path}: {source}")]
    Io {
        level: Option<usize>,
        shard: Option<usize>,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            level: None,
            shard: None,
            path: path.into(),
            source,
        }
    }

    /// Attaches level/shard context to an I/O error; other variants pass through.
    pub(crate) fn at_level(self, level: usize, shard: Option<usize>) -> Self {
        match self {
            Error::Io {
                path,
                source,
                level: None,
                ..
            } => Error::Io {
                level: Some(level),
                shard,
                path,
                source,
            },
            other => other,
        }
    }
}
