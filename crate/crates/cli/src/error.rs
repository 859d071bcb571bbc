use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bmm_core::Error),

    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for usage and validation problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) | CliError::Config { .. } => 2,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Runtime(_) => 1,
        }
    }

    pub fn write(path: &Path, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.to_owned(),
            source,
        }
    }

    pub fn csv(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv: {e}"))
    }
}
