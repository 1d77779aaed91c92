use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("axis error: {0}")]
    Axis(String),

    #[error("field modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u8, u8),

    #[error("unsupported field size {0} (supported: 2, 3, 5, 7)")]
    UnsupportedField(u8),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("channel row {row} sums to {sum}, expected 1 within 1e-9")]
    Normalization { row: usize, sum: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("enumeration guard exceeded: {0}")]
    Guard(String),

    #[error("embedding invariant violated: {0}")]
    Embedding(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
