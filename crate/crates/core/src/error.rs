use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index ({row}, {col}) out of range for a {rows}x{cols} operator")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("gram operator is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("explicit adjoint of level {level} needs diagonal gram operators")]
    ImplicitAdjoint { level: usize },

    #[error("dense oracle cap exceeded: dimension {dim} > cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("operator at level {level} has no nonzero singular value")]
    NoNonzeroSingularValue { level: usize },

    #[error("level {level} is ill-posed: relative gap {ratio:e} below rank-stability threshold {threshold:e}")]
    IllPosed {
        level: usize,
        ratio: f64,
        threshold: f64,
    },

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("kernel basis is not orthonormal (deviation {0:e})")]
    KernelNotOrthonormal(f64),

    #[error("incompatible data: {0}")]
    Incompatible(String),

    #[error("cohomology at level {level} is nontrivial (dim {dim}); augmented saddle form unavailable")]
    NontrivialCohomology { level: usize, dim: usize },

    #[error("invalid level {level} for a complex with {spaces} spaces")]
    InvalidLevel { level: usize, spaces: usize },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
