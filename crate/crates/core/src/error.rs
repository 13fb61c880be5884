use thiserror::Error;

/// Errors produced by the library.
///
/// Variants mirror the failure classes of the public operations: domain and
/// shape checks, data validation, grid refinement mismatches, combinatorial
/// capacity limits, control admissibility, and solver divergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("admissibility error: {0}")]
    Admissibility(String),

    #[error("divergence error: {0}")]
    Divergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration/validation
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence(_) => 3,
            _ => 2,
        }
    }
}
