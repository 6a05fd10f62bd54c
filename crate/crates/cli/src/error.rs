use thiserror::Error;

/// Failure categories with their process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration, descriptor or output path.
    #[error("{0}")]
    Config(String),
    /// Domain, regressivity or overflow failure during computation.
    #[error("{0}")]
    Compute(tscale::Error),
}

impl CliError {
    pub fn config(e: impl ToString) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl From<tscale::Error> for CliError {
    fn from(e: tscale::Error) -> Self {
        match e.root() {
            tscale::Error::Input(_) | tscale::Error::Partition(_) => CliError::Config(e.to_string()),
            _ => CliError::Compute(e),
        }
    }
}
