use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line or cell could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A cell of a matrix file could not be parsed. Coordinates are 1-based
    /// over the raw file (row 1 is the header).
    #[error("parse error at row {row}, column {column}: {message}")]
    ParseCell {
        row: usize,
        column: usize,
        message: String,
    },

    /// Structurally invalid input (ragged rows, dangling node references...).
    #[error("format error: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    /// Inputs that should share dimensions do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no qualifying seed node after {attempts} attempts")]
    NoQualifyingSeed { attempts: usize },

    #[error("node {0:?} is not part of the graph")]
    ForeignNode(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by bad user input or configuration, as opposed to bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Param(_) | Error::Config(_) | Error::Protocol(_))
    }
}
