use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed alist input. `line` is 1-based.
    #[error("alist line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("invalid code structure: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The decode outcome is the transmitted all-zeros codeword.
    #[error("no error event: decoder converged to the all-zeros codeword")]
    NoErrorEvent,

    #[error("shift-point selection is empty: {0}")]
    EmptySelection(String),

    /// Every mixture term in the weight denominator underflowed, or the
    /// weight itself is not finite.
    #[error("importance weight overflow{}", trial.map(|t| format!(" on trial {t}")).unwrap_or_default())]
    WeightOverflow { trial: Option<u64> },

    #[error("catalog format error at line {line}: {msg}")]
    CatalogFormat { line: usize, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
