use thiserror::Error;

/// Errors produced by the numerics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 3, got {0}")]
    Dimension(usize),

    #[error("quadrature exponent {0} must be greater than -1")]
    Exponent(f64),

    #[error("quadrature order must be at least 1")]
    Order,

    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },

    #[error("degree {degree} exceeds band limit {band_limit}")]
    BandLimit { degree: usize, band_limit: usize },

    #[error("odd degree {0} has no Radon eigenvalue formula")]
    OddDegree(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("representation mismatch: {0}")]
    Representation(&'static str),

    #[error("linear map is singular (det = {0})")]
    Singular(f64),

    #[error("matrix is not symmetric positive-definite")]
    NotSpd,

    #[error("zonal functions only admit maps of the form diag(a,..,a,b)")]
    NotAxisymmetric,

    #[error("perturbation norm {0} must be below 1/2")]
    PerturbationTooLarge(f64),

    #[error("radial function is not positive (min {0:e})")]
    NonPositive(f64),

    #[error("function is not mean-zero (mean {0:e})")]
    NotMeanZero(f64),

    #[error("iteration diverged at step {step}: |phi|_2 went from {before:e} to {after:e}")]
    Diverged {
        step: usize,
        before: f64,
        after: f64,
    },

    #[error("invalid option: {0}")]
    InvalidOption(String),
}

pub type Result<T> = std::result::Result<T, Error>;
