use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of the benchmark harness, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Solver(#[from] tnnr::Error),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 usage, 3 divergence, 4 input/output, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Solver(tnnr::Error::Config(_)) => 2,
            Self::Solver(tnnr::Error::Divergence { .. }) => 3,
            Self::Io { .. } | Self::Format(_) => 4,
            Self::Solver(_) => 1,
        }
    }
}
