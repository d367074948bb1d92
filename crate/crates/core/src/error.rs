use thiserror::Error;

/// Errors raised by the engine and its data structures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BmmError {
    #[error("matrix dimensions must be at least 1, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("invalid straight-line program: {0}")]
    Program(String),
    #[error("invalid level order: {0}")]
    Order(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BmmError {
    fn from(e: std::io::Error) -> Self {
        BmmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BmmError>;
