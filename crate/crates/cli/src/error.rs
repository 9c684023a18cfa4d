use thiserror::Error;
use voi_core::VoiError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Solver(String),

    #[error("{0}")]
    Cap(String),

    #[error("{0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Cap(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<VoiError> for CliError {
    fn from(e: VoiError) -> Self {
        match e {
            VoiError::EnumerationCap { .. } => CliError::Cap(e.to_string()),
            VoiError::NoConvergence(_) => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("malformed problem file: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv output failed: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
