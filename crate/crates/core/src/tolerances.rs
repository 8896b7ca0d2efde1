use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Largest condition number accepted for W, M_SA, M_HA and Z at a grid point.
    pub cond_tol: f64,
    /// Absolute Hermitian-symmetry tolerance before eigensolves.
    pub hermitian_tol: f64,
    /// Relative eigenvalue cutoff when extracting a frame from Q.
    pub rank_tol: f64,
    /// Relative Frobenius residual accepted as an exact MMV fit.
    pub residual_tol: f64,
    /// Relative singular-value cutoff for column-rank decisions.
    pub svd_rank_tol: f64,
    /// Negative eigenvalues of Q down to `-psd_tol * trace(Q)` are treated as zero.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cond_tol: 1e8,
            hermitian_tol: 1e-12,
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            svd_rank_tol: 1e-10,
            psd_tol: 1e-10,
        }
    }
}
