use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or levels of operands do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A space / operator descriptor is internally inconsistent.
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
    /// An exponent outside [1, inf].
    #[error("invalid exponent: {0}")]
    Exponent(f64),
    /// Bad numerical input (non-projections, negative weights, ...).
    #[error("invalid input: {0}")]
    Input(String),
    /// Unknown name passed to a registry lookup.
    #[error("unknown check: {0}")]
    UnknownCheck(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
