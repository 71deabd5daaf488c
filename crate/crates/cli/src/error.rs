use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read config {path}: {source}")]
    Config { path: String, source: Box<dyn std::error::Error + Send + Sync> },

    #[error(transparent)]
    Core(#[from] ussl_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 0 success, 1 i/o, 2 validation, 3 solver non-convergence,
    /// 4 simulation infeasibility or degenerate data.
    pub fn exit_code(&self) -> u8 {
        use ussl_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(E::InvalidArgument(_)) => 2,
            CliError::Core(E::NotConverged { .. }) => 3,
            CliError::Core(E::Infeasible(_) | E::Degenerate(_)) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
