//! Continuous-to-finite recovery: demodulate by `W^{-1}`, reduce the infinite set of
//! measurement vectors to one MMV problem through `Q = sum y y^H`, identify the joint
//! support, then invert on it.

mod solvers;

pub use solvers::{solve_mmv_exhaustive, solve_mmv_somp, MmvProblem, Solver, EXHAUSTIVE_MAX_SUPPORTS};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::linalg::{has_full_column_rank, hermitian_eigen, pseudo_inverse, select_columns, symmetrize, CMat, CVec, C64, ZERO};
use crate::sampling_design::MeasurementDesign;
use crate::si_core::{apply_operator, CoefficientBank, MeasurementBank};
use crate::tolerances::Tolerances;

/// `ỹ(e^{jω}) = W^{-1}(e^{jω}) y(e^{jω})`, leaving the static system `ỹ = A Z d`.
pub fn demodulate(y: &MeasurementBank, design: &MeasurementDesign, cond_tol: f64) -> Result<MeasurementBank> {
    if y.channels() != design.p() || y.len() != design.grid().len() {
        return Err(Error::Dimension(format!(
            "{} channels of length {} for a design with p = {} on N = {}",
            y.channels(),
            y.len(),
            design.p(),
            design.grid().len()
        )));
    }
    let inv = design.w().inverse(cond_tol)?;
    MeasurementBank::new(apply_operator(y.sequences(), &inv)?)
}

/// `Q = sum_n ỹ[n] ỹ[n]^H`.
pub fn compute_q(y: &MeasurementBank) -> CMat {
    outer_sum(y.sequences(), y.len())
}

/// `sum_q Ỹ(ω_q) Ỹ(ω_q)^H`, which equals `N` times [`compute_q`] on a DFT grid.
pub fn compute_q_frequency(y: &MeasurementBank) -> CMat {
    outer_sum(&dft::forward_all(y.sequences()), y.len())
}

fn outer_sum(seqs: &[Vec<C64>], len: usize) -> CMat {
    let p = seqs.len();
    let mut q = CMat::zeros(p, p);
    for n in 0..len {
        let v = CVec::from_iterator(p, seqs.iter().map(|s| s[n]));
        q += &v * v.adjoint();
    }
    q
}

/// A frame `V` with `Q = V V^H`, and the spectrum it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub v: CMat,
    /// Eigenvalues of `Q`, descending.
    pub eigenvalues: Vec<f64>,
}

impl Frame {
    pub fn rank(&self) -> usize {
        self.v.ncols()
    }
}

/// `V = U_r Λ_r^{1/2}` over eigenvalues above `rank_tol * λ_max`.
pub fn frame_from_q(q: &CMat, tol: &Tolerances) -> Result<Frame> {
    let h = symmetrize(q, tol.hermitian_tol).ok_or_else(|| Error::InvalidInput("Q is not Hermitian".into()))?;
    let (mut vals, vecs) = hermitian_eigen(&h);
    let trace: f64 = vals.iter().sum();
    if let Some(&lo) = vals.first() {
        if lo < -tol.psd_tol * trace.abs() {
            return Err(Error::InvalidInput(format!("Q is indefinite: eigenvalue {lo:e}, trace {trace:e}")));
        }
    }
    let hi = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = if hi > 0.0 { (0..vals.len()).rev().filter(|&i| vals[i] > tol.rank_tol * hi).collect() } else { Vec::new() };
    let v = CMat::from_fn(q.nrows(), keep.len(), |r, c| vecs[(r, keep[c])] * vals[keep[c]].sqrt());
    vals.reverse();
    Ok(Frame { v, eigenvalues: vals })
}

/// Which Gram matrix feeds the frame extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QDomain {
    #[default]
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CtfOptions {
    pub solver: Solver,
    pub q_domain: QDomain,
    pub tolerances: Tolerances,
}

impl CtfOptions {
    pub fn with_solver(solver: Solver) -> Self {
        Self { solver, ..Self::default() }
    }
}

/// Joint support found by the CTF block, with the intermediate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    pub support: BTreeSet<usize>,
    pub rank_q: usize,
    pub q_eigenvalues: Vec<f64>,
    /// Relative Frobenius residual of the frame on the chosen columns.
    pub residual: f64,
    pub frame: CMat,
}

/// Runs the MMV solver on an explicit frame.
pub fn solve_frame(a: &CMat, v: CMat, k_max: usize, opts: &CtfOptions) -> Result<(BTreeSet<usize>, f64)> {
    let prob = MmvProblem::new(a.clone(), v, k_max)?;
    let support = match opts.solver {
        Solver::Exhaustive => solve_mmv_exhaustive(&prob, &opts.tolerances)?,
        Solver::Somp => solve_mmv_somp(&prob, &opts.tolerances),
    };
    let residual = prob.relative_residual(&support, &opts.tolerances);
    Ok((support, residual))
}

/// demodulate, build `Q`, extract a frame, solve one MMV problem.
pub fn recover_support(
    y: &MeasurementBank,
    design: &MeasurementDesign,
    k_max: usize,
    opts: &CtfOptions,
) -> Result<SupportEstimate> {
    let y_tilde = demodulate(y, design, opts.tolerances.cond_tol)?;
    let q = match opts.q_domain {
        QDomain::Time => compute_q(&y_tilde),
        QDomain::Frequency => compute_q_frequency(&y_tilde),
    };
    let frame = frame_from_q(&q, &opts.tolerances)?;
    let (support, residual) = solve_frame(design.a(), frame.v.clone(), k_max, opts)?;
    Ok(SupportEstimate {
        support,
        rank_q: frame.rank(),
        q_eigenvalues: frame.eigenvalues,
        residual,
        frame: frame.v,
    })
}

/// `d^S(ω_q) = Z_S^{-1}(ω_q) A_S^+ ỹ(ω_q)`; channels off `support` are exactly zero.
pub fn recover_coefficients(
    y: &MeasurementBank,
    design: &MeasurementDesign,
    support: &BTreeSet<usize>,
    tol: &Tolerances,
) -> Result<CoefficientBank> {
    let (m, n) = (design.m(), design.grid().len());
    if let Some(&bad) = support.iter().find(|&&l| l >= m) {
        return Err(Error::InvalidInput(format!("support index {bad} out of range for m = {m}")));
    }
    let cols: Vec<usize> = support.iter().copied().collect();
    let a_s = select_columns(design.a(), &cols);
    if !has_full_column_rank(&a_s, tol.svd_rank_tol) {
        return Err(Error::RankDeficient { support: cols });
    }
    let mut out = vec![vec![ZERO; n]; m];
    if cols.is_empty() {
        return CoefficientBank::new(out);
    }
    let y_tilde = demodulate(y, design, tol.cond_tol)?;
    let spectra = dft::forward_all(y_tilde.sequences());
    let pinv = pseudo_inverse(&a_s, tol.svd_rank_tol);
    let mut bins = vec![vec![ZERO; n]; cols.len()];
    for q in 0..n {
        let yq = CVec::from_iterator(design.p(), spectra.iter().map(|s| s[q]));
        let x = &pinv * yq;
        for (k, &l) in cols.iter().enumerate() {
            let zl = design.z().map_or(C64::new(1.0, 0.0), |z| z.at(q)[(l, l)]);
            bins[k][q] = x[k] / zl;
        }
    }
    for (k, seq) in dft::inverse_all(&bins).into_iter().enumerate() {
        out[cols[k]] = seq;
    }
    CoefficientBank::new(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub rank_q: usize,
    pub residual: f64,
    pub solver: Solver,
    pub q_eigenvalues: Vec<f64>,
}

/// Support and coefficients recovered from compressed measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub support: BTreeSet<usize>,
    pub coefficients: CoefficientBank,
    pub diagnostics: Diagnostics,
}

/// Full chain: [`recover_support`] followed by [`recover_coefficients`].
pub fn recover(
    y: &MeasurementBank,
    design: &MeasurementDesign,
    k_max: usize,
    opts: &CtfOptions,
) -> Result<RecoveryResult> {
    let est = recover_support(y, design, k_max, opts)?;
    let coefficients = recover_coefficients(y, design, &est.support, &opts.tolerances)?;
    Ok(RecoveryResult {
        support: est.support,
        coefficients,
        diagnostics: Diagnostics {
            rank_q: est.rank_q,
            residual: est.residual,
            solver: opts.solver,
            q_eigenvalues: est.q_eigenvalues,
        },
    })
}

/// `||d_hat - d||^2 / ||d||^2`; defined as 0 for a zero reference and a recovery of norm at most 1e-12.
pub fn nmse(estimate: &CoefficientBank, truth: &CoefficientBank) -> Result<f64> {
    let err = estimate.squared_distance(truth)?;
    let energy = truth.total_energy();
    if energy == 0.0 {
        return Ok(if estimate.total_energy().sqrt() <= 1e-12 { 0.0 } else { f64::INFINITY });
    }
    Ok(err / energy)
}

#[cfg(test)]
mod tests;
