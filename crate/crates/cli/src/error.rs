use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mc_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("config error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(mc_core::Error::Parse { .. }) => 2,
            CliError::Core(mc_core::Error::Invalid(_)) => 3,
            CliError::Core(mc_core::Error::Capacity(_)) => 4,
            CliError::Core(mc_core::Error::Io(_)) | CliError::Io(_) | CliError::Csv(_) => 5,
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::VerificationFailed(_) => 6,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
