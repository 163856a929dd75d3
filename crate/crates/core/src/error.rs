use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix data has {len} entries, expected {dim}x{dim}")]
    BadShape { dim: usize, len: usize },

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NotConverged { residual: f64 },

    #[error("matrix is not anti-Hermitian: skew residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotAntiHermitian { residual: f64, tolerance: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("descent count {descents} out of range for n = {n}")]
    DescentOutOfRange { n: usize, descents: usize },

    #[error("invalid quadrature request: {0}")]
    InvalidQuadrature(String),

    #[error("work budget exceeded: estimated {estimated:.3e} multiply-adds, budget {budget:.3e}")]
    WorkBudget { estimated: f64, budget: f64 },

    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not enough usable points for a fit: {usable} (excluded {excluded})")]
    NotEnoughPoints { usable: usize, excluded: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
