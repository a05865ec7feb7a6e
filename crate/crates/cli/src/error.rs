use std::path::PathBuf;

use thiserror::Error;

use dialsearch::calibration::CalibrationError;
use dialsearch::evalsvc::EvalError;
use dialsearch::lm::LmError;
use dialsearch::metrics::MetricsError;
use dialsearch::search::SearchError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    /// Unknown flag, missing argument or bad flag value.
    pub const USAGE: i32 = 2;
    /// An input file is missing or unreadable, or an output cannot be written.
    pub const IO: i32 = 3;
    /// An input file exists but does not parse (corpus, model, transcript, CSV, config).
    pub const MALFORMED: i32 = 4;
    /// Inputs parse but are rejected (out-of-range config, nothing to analyze).
    pub const INVALID: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Malformed { .. } => exit::MALFORMED,
            CliError::Invalid(_) => exit::INVALID,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Malformed {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Classifies a library error raised while reading `path`.
    pub fn from_eval(path: impl Into<PathBuf>, e: EvalError) -> Self {
        match e {
            EvalError::Io(source) => CliError::io(path, source),
            EvalError::Transcript { .. } | EvalError::Personas(_) => CliError::malformed(path, e),
            EvalError::Calibration(CalibrationError::Csv { .. }) => CliError::malformed(path, e),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<LmError> for CliError {
    fn from(e: LmError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Invalid(other.to_string()),
        }
    }
}
