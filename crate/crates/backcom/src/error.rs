use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("unknown scenario `{name}`; valid scenarios are {valid}")]
    UnknownScenario { name: String, valid: String },
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] backcom_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::UnknownScenario { .. } => "scenario",
            Error::Sweep(_) => "sweep",
            Error::Usage(_) => "usage",
            Error::Model(_) => "model",
            Error::Io { .. } => "io",
            Error::Csv(_) | Error::Json(_) => "output",
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
