use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("utility entry at row {row}, column {col} is {value}; entries must be strictly positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{what} index {index} out of range (length {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A welfare value is undefined, e.g. the logarithm of a zero utility.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),

    #[error("concave solver stopped after {iterations} iterations with certificate {gap:e}")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
