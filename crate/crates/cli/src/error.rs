use thiserror::Error;

use stripes_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    /// The message starts with the offending field.
    #[error("{0}")]
    Config(String),
    /// Artifacts written so far are on disk and carry a `flagged`/`converged` marker.
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    /// Bad parameters are configuration errors; everything else is the solver's.
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::InvalidParameter { name, reason } => CliError::Config(format!("{name}: {reason}")),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
