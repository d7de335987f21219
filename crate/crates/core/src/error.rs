use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape: {0}")]
    Shape(String),
    #[error("weights: {0}")]
    Weights(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("invalid matrix structure: {0}")]
    Structure(String),
    #[error("unsupported_splitting: {0}")]
    UnsupportedSplitting(String),
    #[error("too_large: n = {n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("singular_splitting: zero diagonal entry at index {index}")]
    SingularSplitting { index: usize },
    #[error("too_many_blocks: {m} blocks requested for {n} rows")]
    TooManyBlocks { n: usize, m: usize },
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("config: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
