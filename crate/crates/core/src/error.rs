//! Crate-wide error type.

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not skew-symmetric (max |w_ij + w_ji| = {0:.3e})")]
    NotSkew(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient relation violated: {0}")]
    Coefficients(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical blow-up at t = {t:.6}: {norm_name} = {norm_value:.6e}")]
    BlowUp {
        t: f64,
        norm_name: &'static str,
        norm_value: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
