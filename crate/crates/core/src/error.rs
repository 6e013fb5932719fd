use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("overlapping pieces on [{lo}, {hi}) have different exponents {first} and {second}")]
    MixedExponentOverlap {
        lo: f64,
        hi: f64,
        first: f64,
        second: f64,
    },

    #[error("invalid piece (lo={lo}, hi={hi}, coef={coef}, alpha={alpha}): {reason}")]
    InvalidPiece {
        lo: f64,
        hi: f64,
        coef: f64,
        alpha: f64,
        reason: &'static str,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid space parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function has zero norm")]
    ZeroFunction,

    #[error("function is not in the space (infinite norm)")]
    NotInSpace,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
