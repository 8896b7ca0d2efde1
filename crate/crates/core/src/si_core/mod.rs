//! Shift-invariant sampling machinery: cross-spectra, Riesz bounds, filter-bank
//! sampling and the non-sparse subspace reconstruction.

mod bank;
mod generators;
mod grid;

pub use bank::{CoefficientBank, MeasurementBank};
pub use generators::{alias_frequency, GeneratorSet, PiecewiseConstant, SpectrumFn};
pub use grid::{FrequencyGrid, PeriodicMatrixFunction};

use crate::dft;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, symmetrize, CMat, CVec, C64, ZERO};
use generators::Representation;

fn check_compatible(s: &GeneratorSet, a: &GeneratorSet) -> Result<()> {
    if s.grid() != a.grid() {
        return Err(Error::Dimension(format!(
            "generator grids differ: N={} vs N={}",
            s.grid().len(),
            a.grid().len()
        )));
    }
    let (ts, ta) = (s.period(), a.period());
    if (ts - ta).abs() > 1e-12 * ts.max(ta) {
        return Err(Error::Dimension(format!("generator periods differ: {ts} vs {ta}")));
    }
    Ok(())
}

/// Sampled cross-correlation `r[n] = <s(t - nT), a(t)>` for compactly supported piecewise functions.
fn piecewise_correlation(
    s: &PiecewiseConstant,
    a: &PiecewiseConstant,
    step: f64,
    steps_per_period: i64,
) -> Vec<(i64, C64)> {
    if s.taps.is_empty() || a.taps.is_empty() {
        return Vec::new();
    }
    let l = steps_per_period;
    let lo = -(s.end() - a.offset - 1).div_euclid(l);
    let hi = (a.end() - 1 - s.offset).div_euclid(l);
    (lo..=hi)
        .map(|n| {
            let r: C64 = s
                .taps
                .iter()
                .enumerate()
                .map(|(k, &v)| v.conj() * a.at(s.offset + k as i64 + n * l))
                .sum();
            (n, r * step)
        })
        .collect()
}

/// `phi_SA(e^{jω_q})` for channel `s_ch` of `s` against channel `a_ch` of `a`, at every grid point.
///
/// Spectral sets use the alias sum `(1/T) sum_j S*(·) A(·)` over the shared alias support;
/// piecewise sets use the DTFT of the exact sampled cross-correlation.
pub fn cross_spectrum(s: &GeneratorSet, s_ch: usize, a: &GeneratorSet, a_ch: usize) -> Result<Vec<C64>> {
    check_compatible(s, a)?;
    if s_ch >= s.channels() || a_ch >= a.channels() {
        return Err(Error::Dimension(format!(
            "channel pair ({s_ch}, {a_ch}) out of range for {} x {} channels",
            s.channels(),
            a.channels()
        )));
    }
    let grid = s.grid();
    match (s.repr(), a.repr()) {
        (Representation::Spectral { alias: js, .. }, Representation::Spectral { alias: ja, .. }) => {
            if js != ja {
                return Err(Error::Dimension(format!("alias supports differ: {js:?} vs {ja:?}")));
            }
            let inv_t = 1.0 / s.period();
            Ok((0..grid.len())
                .map(|q| {
                    let sum: C64 = (0..js.len())
                        .map(|j| s.tabulated(s_ch, q, j).unwrap().conj() * a.tabulated(a_ch, q, j).unwrap())
                        .sum();
                    sum * inv_t
                })
                .collect())
        }
        (
            Representation::Piecewise { step, steps_per_period, generators: gs },
            Representation::Piecewise { step: step_a, generators: ga, .. },
        ) => {
            if (step - step_a).abs() > 1e-12 * step.max(*step_a) {
                return Err(Error::Dimension(format!("cell widths differ: {step} vs {step_a}")));
            }
            let r = piecewise_correlation(&gs[s_ch], &ga[a_ch], *step, *steps_per_period);
            Ok(grid
                .points()
                .map(|w| r.iter().map(|&(n, v)| v * C64::from_polar(1.0, -w * n as f64)).sum())
                .collect())
        }
        _ => Err(Error::Unsupported("cross-spectrum between spectral and piecewise generator sets".into())),
    }
}

/// `M_SA(e^{jω})` with entry `(i, l) = phi_{S_i A_l}`.
pub fn cross_spectrum_matrix(s: &GeneratorSet, a: &GeneratorSet) -> Result<PeriodicMatrixFunction> {
    check_compatible(s, a)?;
    let grid = s.grid();
    let mut values = vec![CMat::zeros(s.channels(), a.channels()); grid.len()];
    for i in 0..s.channels() {
        for l in 0..a.channels() {
            for (q, v) in cross_spectrum(s, i, a, l)?.into_iter().enumerate() {
                values[q][(i, l)] = v;
            }
        }
    }
    PeriodicMatrixFunction::new(grid, values)
}

/// Outcome of a Riesz-bound check over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszReport {
    pub is_riesz: bool,
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Checks `alpha I <= M_AA(e^{jω_q}) <= beta I` at every grid point.
pub fn riesz_check(m_aa: &PeriodicMatrixFunction, alpha: f64, beta: f64, hermitian_tol: f64) -> Result<RieszReport> {
    if !m_aa.is_square() {
        return Err(Error::Dimension(format!("M_AA is {}x{}", m_aa.rows(), m_aa.cols())));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (q, m) in m_aa.values().iter().enumerate() {
        let h = symmetrize(m, hermitian_tol)
            .ok_or_else(|| Error::InvalidInput(format!("M_AA is not Hermitian at grid point {q}")))?;
        let (vals, _) = hermitian_eigen(&h);
        lo = lo.min(vals[0]);
        hi = hi.max(vals[vals.len() - 1]);
    }
    Ok(RieszReport { is_riesz: alpha <= lo && hi <= beta, min_eig: lo, max_eig: hi })
}

/// Frequency-domain filter bank: `C(ω_q) = M(ω_q) D(ω_q)` per DFT bin.
pub fn filterbank_sample(d: &CoefficientBank, m_sa: &PeriodicMatrixFunction) -> Result<MeasurementBank> {
    apply_operator(d.sequences(), m_sa).and_then(MeasurementBank::new)
}

/// Same operator realized as time-domain circular convolution with the operator's impulse responses.
pub fn filterbank_sample_circular(
    d: &CoefficientBank,
    m_sa: &PeriodicMatrixFunction,
) -> Result<MeasurementBank> {
    check_operator_shape(d.sequences(), m_sa)?;
    let n = d.len();
    let taps = m_sa.taps();
    let out = (0..m_sa.rows())
        .map(|i| {
            (0..n)
                .map(|t| {
                    let mut acc = ZERO;
                    for (lag, h) in taps.iter().enumerate() {
                        let idx = (t + n - lag) % n;
                        for l in 0..m_sa.cols() {
                            acc += h[(i, l)] * d.channel(l)[idx];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    MeasurementBank::new(out)
}

fn check_operator_shape(seqs: &[Vec<C64>], op: &PeriodicMatrixFunction) -> Result<()> {
    let len = seqs.first().map_or(0, Vec::len);
    if op.cols() != seqs.len() || op.grid().len() != len {
        return Err(Error::Dimension(format!(
            "operator {}x{} on N={} applied to {} channels of length {len}",
            op.rows(),
            op.cols(),
            op.grid().len(),
            seqs.len()
        )));
    }
    Ok(())
}

/// Applies a periodic operator to a bank of sequences bin by bin.
pub(crate) fn apply_operator(seqs: &[Vec<C64>], op: &PeriodicMatrixFunction) -> Result<Vec<Vec<C64>>> {
    check_operator_shape(seqs, op)?;
    let spectra = dft::forward_all(seqs);
    let out = apply_spectra(&spectra, op);
    Ok(dft::inverse_all(&out))
}

/// Bin-wise product on already transformed sequences.
pub(crate) fn apply_spectra(spectra: &[Vec<C64>], op: &PeriodicMatrixFunction) -> Vec<Vec<C64>> {
    let n = op.grid().len();
    let mut out = vec![vec![ZERO; n]; op.rows()];
    for q in 0..n {
        let x = CVec::from_iterator(spectra.len(), spectra.iter().map(|s| s[q]));
        let y = op.at(q) * x;
        for (i, v) in y.iter().enumerate() {
            out[i][q] = *v;
        }
    }
    out
}

/// Solves `M_SA(ω_q) d(ω_q) = c(ω_q)` at every bin.
pub fn reconstruct_subspace(
    c: &MeasurementBank,
    m_sa: &PeriodicMatrixFunction,
    cond_tol: f64,
) -> Result<CoefficientBank> {
    m_sa.check_invertible(cond_tol)?;
    let inv = m_sa.inverse(cond_tol)?;
    CoefficientBank::new(apply_operator(c.sequences(), &inv)?)
}
