use thiserror::Error;

/// Errors raised by the kernel, RKHS and spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel is not positive definite: Gram minimum eigenvalue {0:e}")]
    NotPositiveDefinite(f64),

    #[error("kernel has no attached spectral measure; attach an extension measure first")]
    MissingMeasure,

    #[error("requested rank {requested} exceeds available rank {available}")]
    Rank { requested: usize, available: usize },

    #[error("no sign change in bracket: {0}")]
    Bracket(String),

    #[error("kernel sections are linearly dependent at level {level} (Gram determinant {det:e})")]
    LinearDependence { level: usize, det: f64 },

    #[error("element carries no derivative samples")]
    MissingDerivative,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
