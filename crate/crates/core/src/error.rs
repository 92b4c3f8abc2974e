use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported constellation order {0} (expected 4, 16, 64 or 256)")]
    UnsupportedOrder(usize),

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("degenerate channel: column {0} has zero or negative energy")]
    DegenerateChannel(usize),

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("no trained parameters for {0}")]
    MissingParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
