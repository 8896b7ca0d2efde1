//! Finite MMV solvers for `V = A U` with row-sparse `U`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::linalg::{projection_residual, select_columns, CMat};
use crate::tolerances::Tolerances;

/// Largest number of candidate supports the exhaustive solver will enumerate at the top size.
pub const EXHAUSTIVE_MAX_SUPPORTS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Exhaustive ℓ0 search over supports of increasing size.
    #[default]
    Exhaustive,
    /// Simultaneous orthogonal matching pursuit.
    Somp,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Somp => "somp",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "somp" => Ok(Self::Somp),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

/// `V = A U` with at most `k_max` nonzero rows in `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmvProblem {
    pub a: CMat,
    pub v: CMat,
    pub k_max: usize,
}

impl MmvProblem {
    pub fn new(a: CMat, v: CMat, k_max: usize) -> Result<Self> {
        if a.nrows() != v.nrows() {
            return Err(Error::Dimension(format!("A has {} rows, V has {}", a.nrows(), v.nrows())));
        }
        if k_max > a.ncols() {
            return Err(Error::InvalidInput(format!("k_max = {k_max} exceeds m = {}", a.ncols())));
        }
        Ok(Self { a, v, k_max })
    }

    /// `||V - A_S A_S^+ V||_F / ||V||_F`, or 0 when `V = 0`.
    pub fn relative_residual(&self, support: &BTreeSet<usize>, tol: &Tolerances) -> f64 {
        let vn = self.v.norm();
        if vn == 0.0 {
            return 0.0;
        }
        let cols: Vec<usize> = support.iter().copied().collect();
        projection_residual(&select_columns(&self.a, &cols), &self.v, tol.svd_rank_tol).norm() / vn
    }
}

/// Smallest support (then lexicographically first) whose columns reproduce `V` within `residual_tol`.
pub fn solve_mmv_exhaustive(prob: &MmvProblem, tol: &Tolerances) -> Result<BTreeSet<usize>> {
    let m = prob.a.ncols();
    let count = binomial(m, prob.k_max);
    if count > EXHAUSTIVE_MAX_SUPPORTS {
        return Err(Error::TooLarge(format!(
            "C({m}, {}) = {count} supports exceeds {EXHAUSTIVE_MAX_SUPPORTS}",
            prob.k_max
        )));
    }
    let vn = prob.v.norm();
    if vn == 0.0 || prob.v.ncols() == 0 {
        return Ok(BTreeSet::new());
    }
    let mut best = f64::INFINITY;
    for size in 0..=prob.k_max {
        for cols in Combinations::new(m, size) {
            let r = projection_residual(&select_columns(&prob.a, &cols), &prob.v, tol.svd_rank_tol).norm() / vn;
            if r <= tol.residual_tol {
                return Ok(cols.into_iter().collect());
            }
            best = best.min(r);
        }
    }
    Err(Error::Infeasible { k_max: prob.k_max, best_residual: best })
}

/// Greedy joint-support pursuit. Stops at `k_max` atoms or once the relative residual is at most
/// `residual_tol`; ties go to the lowest column index.
pub fn solve_mmv_somp(prob: &MmvProblem, tol: &Tolerances) -> BTreeSet<usize> {
    let mut support = BTreeSet::new();
    let vn = prob.v.norm();
    if vn == 0.0 || prob.v.ncols() == 0 {
        return support;
    }
    let norms: Vec<f64> = prob.a.column_iter().map(|c| c.norm()).collect();
    let mut residual = prob.v.clone();
    while support.len() < prob.k_max && residual.norm() > tol.residual_tol * vn {
        let mut pick: Option<(usize, f64)> = None;
        for (i, col) in prob.a.column_iter().enumerate() {
            if support.contains(&i) || norms[i] == 0.0 {
                continue;
            }
            let score = (col.adjoint() * &residual).norm() / norms[i];
            if pick.is_none_or(|(_, s)| score > s) {
                pick = Some((i, score));
            }
        }
        let Some((i, score)) = pick else { break };
        if score == 0.0 {
            break;
        }
        support.insert(i);
        let cols: Vec<usize> = support.iter().copied().collect();
        residual = projection_residual(&select_columns(&prob.a, &cols), &prob.v, tol.svd_rank_tol);
    }
    support
}
