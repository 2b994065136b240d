use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("config error at `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{message}; {suggestion}")]
    Capacity { message: String, suggestion: String },
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
    #[error(transparent)]
    Core(tilepress_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid { .. } => 2,
            CliError::Capacity { .. } => 3,
            CliError::Verification { .. } => 4,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}

impl From<tilepress_core::Error> for CliError {
    fn from(e: tilepress_core::Error) -> Self {
        match e {
            tilepress_core::Error::Capacity { what, required, cap } => CliError::Capacity {
                message: format!("capacity exceeded for {what}: {required} > {cap}"),
                suggestion: "lower --n-max or raise levels.capacity".into(),
            },
            other => CliError::Core(other),
        }
    }
}
