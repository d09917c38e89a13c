//! Error types shared across the simulator.

use thiserror::Error;

/// Top-level simulation error.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("deployment failed: {0} faulty data columns but only {1} spare redundant slots")]
    TooManyFaultyColumns(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parse/serialize errors for the `BMV1` matrix interchange format.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line 1: expected header `BMV1 <rows> <cols>`, got {0:?}")]
    MalformedHeader(String),

    #[error("line {line}: expected {expected} row bits, got {got}")]
    RowLength {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("line {line}: invalid character {ch:?}, rows must be `0`/`1` only")]
    BadChar { line: usize, ch: char },

    #[error("expected {expected} rows, file contains {got}")]
    RowCount { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidParams(msg.into())
    }
}
