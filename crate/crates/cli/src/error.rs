use std::path::Path;

use thiserror::Error;

/// Failures of a run, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("numerical contract violated: {0}")]
    Numerical(catlattice::Error),

    #[error("numerical contract violated: {0}")]
    Contract(String),

    #[error("selftest failed: {}", .0.join(", "))]
    Selftest(Vec<String>),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) | CliError::Contract(_) => 2,
            CliError::Selftest(_) => 3,
        }
    }
}

impl From<catlattice::Error> for CliError {
    fn from(e: catlattice::Error) -> Self {
        match e {
            catlattice::Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
