use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Assertion(_) => 3,
            CliError::Io(_) | CliError::Numerical(_) => 1,
        }
    }
}

impl From<dirdp::Error> for CliError {
    fn from(e: dirdp::Error) -> Self {
        match e {
            dirdp::Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
