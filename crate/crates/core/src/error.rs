use thiserror::Error;

/// Crate-wide error type. Variants are grouped by how callers should react:
/// argument/shape problems are programming or input errors, numeric variants
/// signal that a computation could not reach its accuracy contract, and
/// persistence variants carry file diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// Derivative order outside the range certified by the generalized
    /// spectral-density construction (requires r <= 2*ell).
    #[error("derivative order r={r} is out of scope for ell={ell}; certification requires r <= 2*ell")]
    OutOfScopeOrder { ell: u32, r: u32 },

    #[error("no certified moment-growth constant: {0}")]
    NoCertifiedConstant(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema version mismatch: file has {found}, this build reads {supported}")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
