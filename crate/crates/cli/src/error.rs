use std::fmt;
use std::path::Path;

use auxsel_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// bad arguments, e.g. a label that is not in the graph
    Usage(String),
    Io(String),
    /// an input file that does not parse
    Parse(String),
    Domain(Error),
    /// rank condition violated under `--strict`
    Violated,
}

impl CliError {
    pub fn input(path: &Path, e: Error) -> CliError {
        match e {
            Error::Json(m) | Error::Csv(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => CliError::Domain(other),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Domain(_) | CliError::Violated => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
            CliError::Parse(m) => write!(f, "parse: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Violated => write!(f, "rank condition violated"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownLabel(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other),
        }
    }
}
