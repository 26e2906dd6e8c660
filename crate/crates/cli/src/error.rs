use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

// Domain, shape and plan errors all stem from values the user supplied.
impl From<qmci::Error> for CliError {
    fn from(e: qmci::Error) -> Self {
        match e {
            qmci::Error::Capacity(m) => CliError::Capacity(m),
            qmci::Error::Io(m) | qmci::Error::Parse(m) => CliError::Io(m),
            qmci::Error::Domain(m) | qmci::Error::Shape(m) | qmci::Error::Plan(m) => {
                CliError::Config(m)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
