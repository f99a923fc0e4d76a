//! Error types shared by all modules.

use thiserror::Error;

/// Errors produced by ingestion, model evaluation, fitting, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// Tabular input could not be parsed; `row` is the 1-based data row.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// Input violated a structural precondition (ordering, lengths, kinds).
    #[error("validation error: {0}")]
    Validation(String),

    /// A value fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model fitting could not produce a solution.
    #[error("fit error: {0}")]
    Fit(String),

    /// Statistical estimation had no usable inputs.
    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
