use std::fmt;
use std::path::Path;
use std::process::ExitCode;

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing inputs, invalid configurations: exit 2.
    Usage(String),
    /// Reading or writing failed: exit 3.
    Io(String),
    /// The numerics refused the input: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn code(&self) -> ExitCode {
        match self {
            Self::Runtime(_) => ExitCode::from(1),
            Self::Usage(_) => ExitCode::from(2),
            Self::Io(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "error: {m}"),
            Self::Io(m) => write!(f, "I/O error: {m}"),
            Self::Runtime(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<radsplit::Error> for CliError {
    fn from(e: radsplit::Error) -> Self {
        use radsplit::Error as E;
        match e {
            E::Io(_) => Self::Io(e.to_string()),
            E::NumericalFailure { .. } | E::DegenerateInput(_) => Self::Runtime(e.to_string()),
            E::InvalidArgument(_) | E::Validation(_) | E::Parse { .. } => {
                Self::Usage(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Fails with a usage error naming `path` if it does not exist.
pub fn require_input(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
