use thiserror::Error;

/// Errors produced by the separation engine and its numerical helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("operation not defined for domain {0}")]
    DomainMismatch(String),

    #[error("mixing matrix is rank deficient after {attempts} attempts")]
    DegenerateMixing { attempts: usize },

    #[error("non-finite activity at inner step {tau}{}", sample.map(|s| format!(" of sample {s}")).unwrap_or_default())]
    NumericalDivergence { tau: usize, sample: Option<usize> },

    #[error("normalized off-diagonal spectrum reaches -1 (lambda_min = {lambda_min})")]
    SpectrumAtSingularity { lambda_min: f64 },

    #[error("exact alignment supports at most 8 sources, got {0}")]
    TooLargeForExactAlignment(usize),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
