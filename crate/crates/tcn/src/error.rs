//! Library-wide error type.
//!
//! Three failure classes: configuration errors (bad hyperparameters or
//! mismatched shapes at build time), data errors (labels out of range, length
//! mismatches), and parse errors (malformed files, reported with a location).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TcnError {
    /// Invalid configuration: bad hyperparameter, shape mismatch, unknown key.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid data: label out of range, empty dataset, length mismatch.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed file contents; `location` is a line number or byte offset.
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TcnError>;

impl TcnError {
    pub fn config(msg: impl Into<String>) -> Self {
        TcnError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        TcnError::Data(msg.into())
    }

    pub fn parse(
        path: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        TcnError::Parse {
            path: path.into(),
            location: location.into(),
            message: message.into(),
        }
    }
}
