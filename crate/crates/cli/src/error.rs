use thiserror::Error;

/// Documented process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const IC_VIOLATED: i32 = 4;
    pub const GUARD: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] truthscore::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Usage(_) => exit::FAILURE,
            CliError::Parse { .. } => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Core(truthscore::Error::GuardExceeded { .. }) => exit::GUARD,
            CliError::Core(_) => exit::VALIDATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
