use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The CLI maps these onto exit codes: parse/definition problems exit 2,
/// capacity gates exit 3, numeric range problems exit 4, everything else 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("not in the logarithmic singularity class: {0}")]
    Classification(String),

    #[error("invalid weight definition: {0}")]
    Definition(String),

    #[error("unsupported series representation: {0}")]
    Representation(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("bad data: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
