use std::fmt;
use std::path::Path;

use courtvec_core::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or arguments: exit 1.
    Usage(String),
    /// Input data that fails validation: exit 2.
    Data(String),
    /// Failures while running (training divergence, I/O on outputs): exit 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn within(self, path: &Path) -> Self {
        let prefix = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Usage(m) => CliError::Usage(prefix(m)),
            CliError::Data(m) => CliError::Data(prefix(m)),
            CliError::Runtime(m) => CliError::Runtime(prefix(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Argument(_) => CliError::Usage(message),
            Error::Divergence { .. } | Error::DegenerateModel { .. } | Error::Io(_) => CliError::Runtime(message),
            _ => CliError::Data(message),
        }
    }
}
