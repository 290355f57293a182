use cch_core::CchError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CchError),
    #[error("config: {0}")]
    Config(String),
    #[error("target norm cannot be reached: {0}")]
    UnreachableTarget(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{failed} inequality checks failed")]
    InequalityFailed { failed: usize },
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}

impl CliError {
    /// Machine-readable category printed with every failure.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Config(_) | CliError::UnreachableTarget(_) => "config",
            CliError::Checkpoint(_) => "checkpoint",
            CliError::Csv(_) | CliError::Io(_) | CliError::Json(_) => "io",
            CliError::InequalityFailed { .. } => "inequality",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
