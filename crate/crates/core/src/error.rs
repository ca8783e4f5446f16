use std::fmt;

use thiserror::Error;

/// Location-tagged failure while reading one of the text formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} = {got} exceeds the supported maximum of {limit}")]
    Capacity {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("the affine map has an empty intersection with the hypercube")]
    NoIntersection,

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("witness store: {0}")]
    Store(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
