use std::fmt;
use std::process::ExitCode;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Reading, writing or parsing input: exit 1.
    Io(String),
    /// Rejected by the numerics (genericity, interlacing, ...): exit 2.
    Domain(szego_core::Error),
    /// A verification property failed: exit 3.
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Io(_) => ExitCode::from(1),
            CliError::Domain(_) => ExitCode::from(2),
            CliError::Property(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "error: {msg}"),
            CliError::Domain(e) => write!(f, "error: {e}"),
            CliError::Property(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl From<szego_core::Error> for CliError {
    fn from(e: szego_core::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
