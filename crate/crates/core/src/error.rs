use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular operator at grid point {q}: condition number {cond:.3e} exceeds {limit:.3e}")]
    SingularOperator { q: usize, cond: f64, limit: f64 },

    #[error("rank-deficient column set {support:?}")]
    RankDeficient { support: Vec<usize> },

    #[error("no support with at most {k_max} atoms fits the measurements (best relative residual {best_residual:.3e})")]
    Infeasible { k_max: usize, best_residual: f64 },

    #[error("combinatorial guard: {0}")]
    TooLarge(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
