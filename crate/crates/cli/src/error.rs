use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] typgas::Error),

    #[error("cannot read config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("self-check failed: {0}")]
    SelfcheckFailed(String),
}

impl CliError {
    /// 2 for bad input, 3 when a sector is too large to count or enumerate,
    /// 4 for a failed self-check, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(typgas::Error::Capacity { .. } | typgas::Error::Overflow) => 3,
            CliError::Core(_) => 2,
            CliError::SelfcheckFailed(_) => 4,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
