use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error(transparent)]
    Core(#[from] onebit_core::Error),
    /// An inline invariant check failed; never tolerated.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl HarnessError {
    /// Process exit status: 2 for usage errors, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Io { .. } | HarnessError::Write(_) => 3,
            _ => 1,
        }
    }
}
