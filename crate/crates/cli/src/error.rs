use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ensemble_grover::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Output(String),

    #[error("cannot read input: {0}")]
    Input(#[from] csv::Error),

    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Output(_) | CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
