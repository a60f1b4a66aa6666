use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported matrix shape {rows}x{cols} (only 2x2, 4x4 and 16x16 are supported)")]
    UnsupportedShape { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular to working precision (|det| = {det:e}, threshold {threshold:e})")]
    SingularMatrix { det: f64, threshold: f64 },

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    NonConvergence { a: f64, b: f64 },

    #[error("basis is not orthonormal (max Gram deviation {0:e})")]
    NonOrthonormalBasis(f64),

    #[error("alpha = {alpha} outside the valid range {range}")]
    AlphaOutOfRange { alpha: f64, range: &'static str },

    #[error("closed-form denominator {0:e} is too close to zero")]
    DenominatorNearZero(f64),

    #[error("populations sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("run for input {0} has no recorded outcomes")]
    EmptyRun(String),
}

pub type Result<T> = std::result::Result<T, Error>;
