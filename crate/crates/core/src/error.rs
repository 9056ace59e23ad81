use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Too few points, nodes or samples for the requested construction.
    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed input data; the message carries line or record context.
    #[error("format error: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The quadratic program has no unique minimizer or produced non-finite values.
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
