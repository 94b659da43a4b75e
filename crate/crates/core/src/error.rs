use thiserror::Error;

/// Errors raised by state construction, witness evaluation and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("assemblage has no settings")]
    EmptyAssemblage,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("assemblage is signaling: reduced states differ by {0:e}")]
    Signaling(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("covariance matrix violates the uncertainty principle (min eigenvalue {0:e})")]
    Unphysical(f64),

    #[error("{qubits} qubits exceed the dense-storage limit of {max}")]
    TooLarge { qubits: usize, max: usize },

    #[error("unsupported functional: {0}")]
    UnsupportedFunctional(String),

    #[error("this bound is only dimensionally consistent in natural units (hbar = m = 1)")]
    NonNaturalUnits,

    #[error("outcome tables do not match: {0}")]
    MismatchedTables(String),

    #[error("unknown setting `{0}`")]
    UnknownSetting(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
