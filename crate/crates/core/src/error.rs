use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}: target column '{column}' not found")]
    MissingTarget { path: PathBuf, column: String },

    #[error("{path}: no feature columns besides target '{column}'")]
    NoFeatures { path: PathBuf, column: String },

    #[error("{path}: line {line}, column '{column}': cannot parse '{value}' as a number")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: String,
        value: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: no data rows")]
    NoRows { path: PathBuf },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("feature count mismatch: model expects {expected}, data has {found}")]
    FeatureMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
}

impl Error {
    /// Errors caused by the input data rather than by the computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::EmptyFile { .. }
                | Error::MissingTarget { .. }
                | Error::NoFeatures { .. }
                | Error::NonNumeric { .. }
                | Error::RaggedRow { .. }
                | Error::NoRows { .. }
                | Error::FeatureMismatch { .. }
                | Error::Format { .. }
        )
    }
}
