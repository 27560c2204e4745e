use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}:{line}:{column}: {message}")]
    MalformedFile {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}:{column}: non-finite value")]
    NonFiniteValue {
        path: PathBuf,
        line: usize,
        column: usize,
    },
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("missing {0} (pass it on the command line or in the config's io section)")]
    MissingPath(&'static str),
}

impl CliError {
    pub fn stage(stage: &'static str, err: impl std::fmt::Display) -> Self {
        CliError::Stage {
            stage,
            message: err.to_string(),
        }
    }

    /// Process exit status for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingPath(_) => 3,
            CliError::MalformedFile { .. } | CliError::NonFiniteValue { .. } | CliError::Read { .. } => 4,
            CliError::Stage { .. } => 5,
            CliError::Write { .. } => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
