use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the forecasting and testing machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet size {0} (need at least 2 outcomes)")]
    InvalidAlphabet(usize),

    #[error("outcome {outcome} out of range for alphabet of size {size}")]
    InvalidOutcome { outcome: usize, size: usize },

    #[error("invalid forecast: {0}")]
    InvalidForecast(String),

    #[error("invalid probability {0} (must lie in [0, 1])")]
    InvalidProbability(f64),

    #[error("invalid measure table: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration of {size}^{depth} prefixes exceeds the budget of {budget}")]
    EnumerationTooLarge { size: usize, depth: usize, budget: u64 },

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("unknown strategy id `{0}`")]
    UnknownStrategy(String),

    #[error("unknown test id `{0}`")]
    UnknownTest(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a bad configuration or registry id rather
    /// than by the environment.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
