use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("{kind} `{name}`: {message}")]
    Classifier {
        kind: &'static str,
        name: String,
        message: String,
    },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable category, used for the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidWindow(_) => "invalid_window",
            Error::InvalidData(_) => "invalid_data",
            Error::Contract(_) => "contract_violation",
            Error::UnknownFeature(_) => "unknown_feature",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Stratification(_) => "stratification",
            Error::Classifier { .. } => "classifier",
            Error::File { .. } => "file",
            Error::Io { .. } => "io",
            Error::Config(_) => "config",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn file(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::File {
            path: path.into(),
            message: message.into(),
        }
    }
}
