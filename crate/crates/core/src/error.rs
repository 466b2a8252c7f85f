//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension mismatch in a tensor or layer operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite value where the computation requires finite arithmetic.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Token index outside the vocabulary.
    #[error("vocabulary error: {0}")]
    Vocab(String),

    /// A sequence with no unmasked positions.
    #[error("mask error: {0}")]
    Mask(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid or insufficient input data.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed corpus or model file content.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// No token of an utterance was covered by the embedding table.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// File system failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
