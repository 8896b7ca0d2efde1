use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMat, C64, ZERO};
use crate::sampling_design::{biorthogonalize, build_sampling_filters, compressive_sample, sensing_matrix, MatrixKind, MeasurementDesign};
use crate::si_core::{
    cross_spectrum, cross_spectrum_matrix, filterbank_sample, CoefficientBank, FrequencyGrid, GeneratorSet,
    MeasurementBank, PeriodicMatrixFunction, PiecewiseConstant,
};
use crate::sparse_model::{synthesize, AmplitudeDist, SparseSISignal, SparsityProfile};
use crate::tolerances::Tolerances;

use super::{complex_rows, derive_seed};

/// Sub-intervals per base cell used by the waveform quadrature.
pub const QUADRATURE_STEPS: usize = 64;

/// Single generator `a(t)` of the base space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseGenerator {
    /// `a(t) = 1` on `[0, T')`, analysed with `h = a`.
    #[default]
    Box,
    /// `A(ω) = sqrt(T') (2 + cos ωT' + (j/2) sin 2ωT')` on `[0, 2π/T')`, analysed with an ideal
    /// low-pass `h`. Infinite time support.
    Bandlimited,
}

/// A single-generator signal whose coefficients repeat one sparsity pattern in every block of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSparsityScenario {
    pub m: usize,
    pub k: usize,
    /// Active positions within a block, 1-based.
    #[serde(rename = "s_pattern")]
    pub pattern: Vec<usize>,
    #[serde(rename = "t_prime")]
    pub base_period: f64,
    pub n_blocks: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of compressed channels.
    pub p: usize,
    #[serde(default)]
    pub matrix_kind: MatrixKind,
    /// Explicit `p x m` sensing matrix as rows of `[re, im]`; overrides `matrix_kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub generator: BaseGenerator,
    #[serde(default)]
    pub amplitude: AmplitudeDist,
}

impl PeriodicSparsityScenario {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n_blocks == 0 || self.p == 0 {
            return Err(Error::InvalidInput("m, n_blocks and p must be at least 1".into()));
        }
        if !(self.base_period.is_finite() && self.base_period > 0.0) {
            return Err(Error::InvalidInput(format!("base period {} must be positive", self.base_period)));
        }
        let distinct: BTreeSet<usize> = self.pattern.iter().copied().collect();
        if distinct.len() != self.pattern.len() || self.pattern.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "pattern {:?} must hold k = {} distinct positions",
                self.pattern, self.k
            )));
        }
        if let Some(&bad) = self.pattern.iter().find(|&&i| i == 0 || i > self.m) {
            return Err(Error::InvalidInput(format!("pattern position {bad} outside 1..={}", self.m)));
        }
        if self.p > self.m {
            return Err(Error::InvalidInput(format!("p = {} exceeds m = {}", self.p, self.m)));
        }
        Ok(())
    }

    /// 0-based channels of the m-generator form.
    pub fn channels(&self) -> BTreeSet<usize> {
        self.pattern.iter().map(|&i| i - 1).collect()
    }

    pub fn rate(&self) -> RateAccounting {
        RateAccounting::new(self.p, self.m, self.base_period)
    }
}

/// Sampling rates before and after compression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateAccounting {
    /// One sequence at `1/T'`.
    pub baseline_rate: f64,
    /// `p` sequences at `1/(mT')` each.
    pub compressed_rate: f64,
    /// `p/m` in lowest terms.
    pub factor: (usize, usize),
}

impl RateAccounting {
    fn new(p: usize, m: usize, base_period: f64) -> Self {
        let g = gcd(p, m);
        Self {
            baseline_rate: 1.0 / base_period,
            compressed_rate: p as f64 / (m as f64 * base_period),
            factor: (p / g, m / g),
        }
    }

    pub fn factor_value(&self) -> f64 {
        self.factor.0 as f64 / self.factor.1 as f64
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Everything produced for one periodic-sparsity scenario.
#[derive(Debug, Clone)]
pub struct PeriodicSparsityBuild {
    pub scenario: PeriodicSparsityScenario,
    /// `a_l(t) = a(t - l T')`, `l = 0..m`, with period `T = mT'`.
    pub generators: GeneratorSet,
    /// `v_l(t) = q(t - l T')`.
    pub biorthogonal: GeneratorSet,
    /// `s_i = sum_l conj(A_il) v_l`.
    pub filters: GeneratorSet,
    pub design: MeasurementDesign,
    pub signal: SparseSISignal,
    /// `max_q |M_VA - I|`.
    pub biorthogonality_error: f64,
    /// `max |G - 1|` on the base-rate grid.
    pub g_deviation: f64,
    /// `max |v - biorthogonalize(h, a)|` over the tabulated or piecewise description.
    pub generic_route_error: f64,
    base: BaseSets,
}

/// Single-generator sets at period `T'` on the base-rate grid of length `m * n_blocks`.
#[derive(Debug, Clone)]
struct BaseSets {
    a: GeneratorSet,
    q: GeneratorSet,
}

impl PeriodicSparsityBuild {
    /// `d[t] = d_{t mod m}[t div m]`; position `t` is base index `t + 1` in 1-based block terms.
    pub fn base_sequence(&self) -> Vec<C64> {
        interleave(self.signal.coefficients())
    }

    /// Compressed measurements through the generic pipeline.
    pub fn measurements(&self) -> Result<MeasurementBank> {
        compressive_sample(self.signal.coefficients(), &self.design)
    }

    pub fn rate(&self) -> RateAccounting {
        self.scenario.rate()
    }

    /// Reference path without compression: `c[n] = <q(t - nT'), x(t)>` at rate `1/T'`.
    pub fn coefficient_baseline(&self) -> Result<Vec<C64>> {
        let m_qa = cross_spectrum_matrix(&self.base.q, &self.base.a)?;
        let d = CoefficientBank::new(vec![self.base_sequence()])?;
        Ok(filterbank_sample(&d, &m_qa)?.into_sequences().remove(0))
    }
}

/// Interleaves `m` channel sequences into the base sequence.
pub fn interleave(d: &CoefficientBank) -> Vec<C64> {
    let m = d.channels();
    (0..m * d.len()).map(|t| d.channel(t % m)[t / m]).collect()
}

/// 1-based base indices holding a value of modulus above `tol`.
pub fn active_base_indices(seq: &[C64], tol: f64) -> Vec<usize> {
    seq.iter().enumerate().filter(|(_, z)| z.norm() > tol).map(|(t, _)| t + 1).collect()
}

pub fn build_periodic_sparsity(sc: &PeriodicSparsityScenario) -> Result<PeriodicSparsityBuild> {
    sc.validate()?;
    let tol = Tolerances::default();
    let (m, nb, tp) = (sc.m, sc.n_blocks, sc.base_period);
    let period = m as f64 * tp;
    let grid = FrequencyGrid::new(nb)?;
    let base_grid = FrequencyGrid::new(m * nb)?;

    let (generators, biorthogonal, h_mgen, base) = match sc.generator {
        BaseGenerator::Box => {
            let a1 = GeneratorSet::piecewise(tp, tp, base_grid, vec![PiecewiseConstant::unit_box(0)])?;
            let phi = cross_spectrum(&a1, 0, &a1, 0)?;
            let level = phi[0];
            if phi.iter().any(|&z| (z - level).norm() > tol.hermitian_tol * level.norm()) || level.norm() == 0.0 {
                return Err(Error::Unsupported("piecewise prefilter needs a constant, nonzero phi_HA".into()));
            }
            let q1 = GeneratorSet::piecewise(tp, tp, base_grid, vec![PiecewiseConstant::new(0, vec![level.conj().inv()])])?;
            let shifted = |taps: C64| (0..m as i64).map(|l| PiecewiseConstant::new(l, vec![taps])).collect();
            let a = GeneratorSet::piecewise(period, tp, grid, shifted(C64::new(1.0, 0.0)))?;
            let v = GeneratorSet::piecewise(period, tp, grid, shifted(level.conj().inv()))?;
            (a.clone(), v, a, BaseSets { a: a1, q: q1 })
        }
        BaseGenerator::Bandlimited => bandlimited_sets(m, nb, tp, grid, base_grid)?,
    };

    let via_generic = biorthogonalize(&h_mgen, &generators, tol.cond_tol)?;
    let generic_route_error = set_distance(&biorthogonal, &via_generic)?;
    let m_va = cross_spectrum_matrix(&biorthogonal, &generators)?;
    let identity = CMat::identity(m, m);
    let biorthogonality_error = m_va.values().iter().map(|v| max_abs_diff(v, &identity)).fold(0.0, f64::max);
    let g = cross_spectrum(&base.q, 0, &base.a, 0)?;
    let g_deviation = g.iter().map(|z| (z - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);

    let a_mat = match &sc.sensing {
        Some(rows) => {
            let a = complex_rows(rows)?;
            if a.shape() != (sc.p, m) {
                return Err(Error::Dimension(format!("sensing matrix is {:?}, expected ({}, {m})", a.shape(), sc.p)));
            }
            a
        }
        None => sensing_matrix(sc.matrix_kind, sc.p, m, derive_seed(sc.seed, 1))?,
    };
    let kind = sc.sensing.is_none().then_some(sc.matrix_kind);
    let design = MeasurementDesign::new(a_mat, PeriodicMatrixFunction::identity(grid, sc.p), None, tol.cond_tol)?
        .with_provenance(kind, Some(sc.seed));
    let filters = build_sampling_filters(&design, &biorthogonal)?;

    let profile = SparsityProfile::new(m, sc.channels())?;
    let coefficients = synthesize(&profile, nb, derive_seed(sc.seed, 2), sc.amplitude)?;
    let signal = SparseSISignal::new(profile, coefficients, generators.clone())?;

    Ok(PeriodicSparsityBuild {
        scenario: sc.clone(),
        generators,
        biorthogonal,
        filters,
        design,
        signal,
        biorthogonality_error,
        g_deviation,
        generic_route_error,
        base,
    })
}

fn bandlimited_shape(theta: f64) -> C64 {
    C64::new(2.0 + theta.cos(), 0.5 * (2.0 * theta).sin())
}

/// Spectral sets for the bandlimited generator. Alias `j = -j'` of grid point `q` on the
/// m-generator grid lands on base grid point `q + j' n_blocks`. The prefilter is
/// `Q = H / conj(phi_HA)`, which makes `phi_QA = 1`.
fn bandlimited_sets(
    m: usize,
    nb: usize,
    tp: f64,
    grid: FrequencyGrid,
    base_grid: FrequencyGrid,
) -> Result<(GeneratorSet, GeneratorSet, GeneratorSet, BaseSets)> {
    let period = m as f64 * tp;
    let root = tp.sqrt();
    let in_band = move |w: f64| (0.0..TAU / tp).contains(&w);
    let a_fn = move |w: f64| if in_band(w) { bandlimited_shape(w * tp) * root } else { ZERO };
    let h_fn = move |w: f64| if in_band(w) { C64::new(root, 0.0) } else { ZERO };

    let a1 = GeneratorSet::from_spectrum(tp, base_grid, vec![0], 1, move |_, w| a_fn(w))?;
    let h1 = GeneratorSet::from_spectrum(tp, base_grid, vec![0], 1, move |_, w| h_fn(w))?;
    let phi = cross_spectrum(&h1, 0, &a1, 0)?;
    if let Some(q) = phi.iter().position(|z| z.norm() == 0.0) {
        return Err(Error::SingularOperator { q, cond: f64::INFINITY, limit: 0.0 });
    }
    let q1 = h1.recombine(&PeriodicMatrixFunction::from_fn(base_grid, 1, 1, |q, _| {
        CMat::from_element(1, 1, phi[q].conj().inv())
    })?)?;

    let alias: Vec<i64> = (0..m as i64).map(|j| -j).collect();
    let shift = move |l: usize, w: f64| C64::from_polar(1.0, -w * l as f64 * tp);
    let a = GeneratorSet::from_spectrum(period, grid, alias.clone(), m, move |l, w| a_fn(w) * shift(l, w))?;
    let h = GeneratorSet::from_spectrum(period, grid, alias.clone(), m, move |l, w| h_fn(w) * shift(l, w))?;
    let v = GeneratorSet::spectral(period, grid, alias, m, |l, q, j| {
        let w = crate::si_core::alias_frequency(grid, period, q, j);
        h_fn(w) / phi[q + (-j) as usize * nb].conj() * shift(l, w)
    })?;
    Ok((a, v, h, BaseSets { a: a1, q: q1 }))
}

fn set_distance(x: &GeneratorSet, y: &GeneratorSet) -> Result<f64> {
    match (x.piecewise_parts(), y.piecewise_parts()) {
        (Some((_, gx)), Some((_, gy))) => Ok(gx
            .iter()
            .zip(gy)
            .map(|(a, b)| {
                let lo = a.offset.min(b.offset);
                let hi = a.end().max(b.end());
                (lo..hi).map(|c| (a.at(c) - b.at(c)).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)),
        (None, None) => {
            let na = x.alias_support().map_or(0, <[i64]>::len);
            let mut worst: f64 = 0.0;
            for ch in 0..x.channels() {
                for q in 0..x.grid().len() {
                    for j in 0..na {
                        worst = worst.max((x.tabulated(ch, q, j).unwrap() - y.tabulated(ch, q, j).unwrap()).norm());
                    }
                }
            }
            Ok(worst)
        }
        _ => Err(Error::Unsupported("comparing spectral and piecewise generator sets".into())),
    }
}

/// Quadrature against the filter-bank samples for the box generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveformReport {
    pub max_abs_error: f64,
    pub relative_error: f64,
    pub passed: bool,
    /// `y_i[n]` from integrating the modulated waveform.
    #[serde(skip)]
    pub quadrature: Vec<Vec<C64>>,
}

/// Tolerance of [`piecewise_constant_waveform_check`], relative to the sample norm.
pub const WAVEFORM_TOL: f64 = 1e-6;

/// Renders `x(t)` cell by cell, multiplies by the conjugated sampling filters shifted by `nT`,
/// integrates with the trapezoid rule at `T'/64` and compares with [`compressive_sample`].
pub fn piecewise_constant_waveform_check(build: &PeriodicSparsityBuild) -> Result<WaveformReport> {
    let (step, filters) = build
        .filters
        .piecewise_parts()
        .ok_or_else(|| Error::Unsupported("waveform check needs the box generator".into()))?;
    let (_, gens) = build.generators.piecewise_parts().expect("box build has piecewise generators");
    let m = build.scenario.m as i64;
    let nb = build.scenario.n_blocks;
    let coeffs = build.signal.coefficients();
    let cells = m * nb as i64;
    // x(t) on the interior of cell `cell`; cell endpoints take the one-sided limit from inside.
    let x_in_cell = |cell: i64| -> C64 {
        let n = cell.div_euclid(m);
        (0..m as usize)
            .map(|l| {
                let shifted = cell - n * m;
                coeffs.channel(l)[n.rem_euclid(nb as i64) as usize] * gens[l].at(shifted)
            })
            .sum()
    };
    let h = step / QUADRATURE_STEPS as f64;
    let quadrature: Vec<Vec<C64>> = filters
        .iter()
        .map(|s| {
            (0..nb as i64)
                .map(|n| {
                    let mut acc = ZERO;
                    for cell in s.offset..s.end() {
                        let weight = s.at(cell).conj();
                        if weight == ZERO {
                            continue;
                        }
                        let target = (cell + n * m).rem_euclid(cells);
                        let f = |_node: usize| weight * x_in_cell(target);
                        let inner: C64 = (1..QUADRATURE_STEPS).map(f).sum();
                        acc += (f(0) + f(QUADRATURE_STEPS)) * (0.5 * h) + inner * h;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let reference = build.measurements()?;
    let mut max_abs_error: f64 = 0.0;
    let mut err2 = 0.0;
    for (a, b) in quadrature.iter().zip(reference.sequences()) {
        for (x, y) in a.iter().zip(b) {
            let e = (x - y).norm();
            max_abs_error = max_abs_error.max(e);
            err2 += e * e;
        }
    }
    let norm = reference.norm();
    let relative_error = if norm > 0.0 { err2.sqrt() / norm } else { err2.sqrt() };
    Ok(WaveformReport { max_abs_error, relative_error, passed: relative_error <= WAVEFORM_TOL, quadrature })
}
