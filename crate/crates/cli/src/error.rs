use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid field '{field}': {msg}")]
    Validation { field: String, msg: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Numeric(#[from] anosov_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::Budget(_) | CliError::Numeric(anosov_core::Error::BallTooLarge { .. }) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
