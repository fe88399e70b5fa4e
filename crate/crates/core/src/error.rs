use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the testbed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for {len} base stations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("trace parse error at line {line}: {msg}")]
    TraceParse { line: usize, msg: String },

    #[error("trace invalid: {0}")]
    TraceInvalid(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("replay buffer not ready: holds {have}, need {need}")]
    NotReady { have: usize, need: usize },

    #[error("unknown ue id {0}")]
    UnknownUe(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("missing counterpart cell for rb={rb}, ue={ue}, seed={seed}")]
    MissingCounterpart { rb: usize, ue: usize, seed: u64 },

    #[error("no results to report")]
    EmptyResults,

    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
