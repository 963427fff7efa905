use thiserror::Error;

/// Errors raised by the library. Verification failures carry the name of the
/// identity that failed so reports can surface it directly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not skew-symmetric (max |A + Aᵀ| = {0:e})")]
    NotSkew(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("degenerate lattice: generators are ℝ-linearly dependent")]
    DegenerateLattice,
    #[error(
        "nome convention could not be validated (full-period nome rel. err {full:e}, classical rel. err {classical:e})"
    )]
    Convention { full: f64, classical: f64 },
    #[error("evaluation at a pole: {0}")]
    Pole(String),
    #[error("end {0} missing from expansion table")]
    MissingEnd(String),
    #[error("inconsistent section data: {0}")]
    Inconsistent(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
