use std::path::PathBuf;

use chrono::{DateTime, NaiveDate, Utc};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    MalformedRow { path: PathBuf, line: u64, reason: String },

    #[error("{path}:{line}: timestamp does not increase")]
    NonMonotonic { path: PathBuf, line: u64 },

    #[error("{path}:{line}: sample spacing differs from the inferred step of {step_s} s")]
    IrregularStep { path: PathBuf, line: u64, step_s: u32 },

    #[error("{path}: no data rows")]
    EmptyInput { path: PathBuf },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("gap of {gap_s} s after {at} exceeds the {limit_s} s limit")]
    Gap {
        at: DateTime<Utc>,
        gap_s: i64,
        limit_s: u32,
    },

    #[error("series do not overlap in time")]
    NoOverlap,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inputs are not aligned: {0}")]
    Misaligned(String),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("GET {url} failed after {attempts} attempt(s): {message}")]
    Http {
        url: String,
        attempts: u32,
        message: String,
    },

    #[error("forecast payload has no entry for {date}")]
    ForecastDateMissing { date: NaiveDate },

    #[error("malformed forecast payload: {0}")]
    ForecastPayload(String),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
