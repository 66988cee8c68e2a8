use thiserror::Error;

/// Errors produced by the pricing library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {dim} (direction-number table covers {max})")]
    UnsupportedDimension { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("out of domain: {0}")]
    OutOfDomain(f64),

    #[error("target not in subspace: entry {index} is {value:e}, expected zero")]
    TargetNotInSubspace { index: usize, value: f64 },

    #[error("columns are not orthonormal (max Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("use discrete form: continuum formula is singular at r = {0}")]
    UseDiscreteForm(f64),

    #[error("method unsupported for payoff: {method} with {payoff}")]
    UnsupportedMethod { payoff: String, method: String },

    #[error("malformed direction-number table at line {line}: {reason}")]
    DirectionTable { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
