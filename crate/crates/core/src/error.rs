use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive semi-definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator support is rank-deficient: {0}")]
    SupportDeficient(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("Renyi order must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("infeasible channel shape: n_kraus {n_kraus} * d_out {d_out} < d_in {d_in}")]
    InfeasibleShape {
        n_kraus: usize,
        d_in: usize,
        d_out: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
