use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: window holds {have} of {need} samples")]
    InsufficientData { have: usize, need: usize },

    #[error("non-monotonic sample: t={got} s, expected t={expected} s")]
    NonMonotonicSample { got: f64, expected: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrator fault at t={t} s: non-finite plant state")]
    IntegratorFault { t: f64 },

    #[error("weather file {path}, row {row}, column `{column}`: {reason}")]
    WeatherLoad {
        path: PathBuf,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("no {column} reference for {species} in this phase")]
    NoReference { species: String, column: &'static str },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
