use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace} does not match the declared normalization")]
    BadTrace { trace: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subsystem shape {factors:?} is inconsistent with dimension {dim}")]
    InvalidShape { factors: Vec<usize>, dim: usize },

    #[error("vectors do not form an orthonormal basis (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("bases are not mutually unbiased (deviation {deviation:.3e})")]
    NotConjugate { deviation: f64 },

    #[error("Rényi order {alpha} is outside the valid range for this quantity")]
    InvalidOrder { alpha: f64 },

    #[error("Rényi order 1 requested; use the Umegaki relative entropy")]
    AlphaIsOne,

    #[error("invalid probability vector: {reason}")]
    InvalidDistribution { reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (best value {best}, bracket [{lower}, {upper}])")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        best: f64,
        lower: f64,
        upper: f64,
    },

    #[error("{q} is not a prime")]
    NotPrime { q: u64 },

    #[error("field matrix is singular")]
    Singular,

    #[error("problem size {size} exceeds the guard {limit}")]
    GuardExceeded { size: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
