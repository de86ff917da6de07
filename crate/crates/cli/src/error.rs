use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Check(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<nhfp_core::Error> for CliError {
    fn from(e: nhfp_core::Error) -> Self {
        match e {
            nhfp_core::Error::InvalidArgument(m) => CliError::Validation(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
