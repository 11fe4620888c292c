use std::fmt;

use macroacc::Error;

/// Failure of a command, carrying the process exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: flags, scenario files, macrostates, vectors. Exit 1.
    Validation(String),
    /// Valid input whose computation could not be completed. Exit 2.
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Computation(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Computation(msg) => write!(f, "computation failed: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::UnknownFamily(_)
            | Error::EmptySiteTable
            | Error::ArityMismatch { .. }
            | Error::InvalidModel(_)
            | Error::MacrostateArity { .. }
            | Error::InvalidMacrostate(_)
            | Error::InvalidNumber(_)
            | Error::InvalidSchedule(_)
            | Error::InvalidScales(_)
            | Error::NonPositiveDelta
            | Error::NegativeEntry { .. }
            | Error::NotNormalized { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidMap(_)
            | Error::CapExceeded { .. }
            | Error::EmptyFamily
            | Error::InvalidArgument(_) => CliError::Validation(msg),
            _ => CliError::Computation(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
