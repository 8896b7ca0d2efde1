use serde::{Deserialize, Serialize};

use crate::combinatorics::Combinations;
use crate::error::{Error, Result};
use crate::linalg::{has_full_column_rank, select_columns, CMat};

use super::MeasurementDesign;

/// Column count above which exhaustive Kruskal-rank evaluation is refused.
pub const KRUSKAL_MAX_COLUMNS: usize = 24;

/// Largest `q` such that every `q` columns of `a` are linearly independent.
///
/// Rank decisions use `sigma_min > rel_tol * sigma_max` on each column subset.
pub fn kruskal_rank(a: &CMat, rel_tol: f64) -> Result<usize> {
    let (p, m) = a.shape();
    if m > KRUSKAL_MAX_COLUMNS {
        return Err(Error::TooLarge(format!(
            "Kruskal rank needs all column subsets; refusing m = {m} > {KRUSKAL_MAX_COLUMNS}"
        )));
    }
    for q in 1..=p.min(m) {
        let all_independent = Combinations::new(m, q).all(|cols| has_full_column_rank(&select_columns(a, &cols), rel_tol));
        if !all_independent {
            return Ok(q - 1);
        }
    }
    Ok(p.min(m))
}

/// Sparsity levels with guaranteed unique recovery for a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    pub p: usize,
    pub m: usize,
    pub kruskal_rank: usize,
    /// `floor(kruskal_rank / 2)`.
    pub k_max_unique: usize,
}

impl RateReport {
    /// `p >= 2k`: the channel count meets the minimal rate for sparsity `k`.
    pub fn meets_minimal_rate(&self, k: usize) -> bool {
        self.p >= 2 * k
    }

    pub fn guarantees(&self, k: usize) -> bool {
        k <= self.k_max_unique
    }
}

pub fn verify_rate(design: &MeasurementDesign, rel_tol: f64) -> Result<RateReport> {
    let kr = kruskal_rank(design.a(), rel_tol)?;
    Ok(RateReport { p: design.p(), m: design.m(), kruskal_rank: kr, k_max_unique: kr / 2 })
}
