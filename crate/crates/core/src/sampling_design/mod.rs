//! The compressive sampling system: CS matrix `A`, shaping bank `W(e^{jω})`,
//! optional diagonal `Z(e^{jω})`, biorthogonal sets and the resulting sampling filters.

mod kruskal;
mod serial;

pub use kruskal::{kruskal_rank, verify_rate, RateReport, KRUSKAL_MAX_COLUMNS};
pub use serial::DesignDocument;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::linalg::{conj, CMat, CVec, C64};
use crate::si_core::{
    cross_spectrum_matrix, CoefficientBank, FrequencyGrid, GeneratorSet, MeasurementBank,
    PeriodicMatrixFunction,
};

/// Family from which the `p x m` CS matrix is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// i.i.d. complex Gaussian, columns scaled to unit norm.
    #[default]
    Gaussian,
    /// i.i.d. real Gaussian, columns scaled to unit norm.
    RealGaussian,
    /// i.i.d. `±1/sqrt(p)`.
    Bernoulli,
    /// `p` distinct rows of the unitary `m`-point DFT matrix.
    FourierRows,
}

/// Seeded `p x m` sensing matrix. Fourier rows are drawn without replacement.
pub fn sensing_matrix(kind: MatrixKind, p: usize, m: usize, seed: u64) -> Result<CMat> {
    if p == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("sensing matrix must be non-empty, got {p}x{m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = match kind {
        MatrixKind::Gaussian => normalize_columns(CMat::from_fn(p, m, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })),
        MatrixKind::RealGaussian => {
            normalize_columns(CMat::from_fn(p, m, |_, _| C64::new(rng.sample(StandardNormal), 0.0)))
        }
        MatrixKind::Bernoulli => {
            let s = 1.0 / (p as f64).sqrt();
            CMat::from_fn(p, m, |_, _| C64::new(if rng.random::<bool>() { s } else { -s }, 0.0))
        }
        MatrixKind::FourierRows => {
            if p > m {
                return Err(Error::InvalidInput(format!("cannot take {p} distinct rows of an {m}-point DFT")));
            }
            let mut rows = rand::seq::index::sample(&mut rng, m, p).into_vec();
            rows.sort_unstable();
            fourier_rows(m, &rows)?
        }
    };
    Ok(a)
}

/// `A_{il} = e^{j 2 pi l c_i / m} / sqrt(m)` for the listed row offsets `c_i` (0-based `l`).
pub fn fourier_rows(m: usize, rows: &[usize]) -> Result<CMat> {
    let mut seen = std::collections::BTreeSet::new();
    if let Some(c) = rows.iter().find(|&&c| !seen.insert(c % m)) {
        return Err(Error::InvalidInput(format!("coset offset {c} repeats modulo {m}")));
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok(CMat::from_fn(rows.len(), m, |i, l| {
        let phase = 2.0 * std::f64::consts::PI * ((l * rows[i]) % m) as f64 / m as f64;
        C64::from_polar(scale, phase)
    }))
}

fn normalize_columns(mut a: CMat) -> CMat {
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= C64::new(n, 0.0);
        }
    }
    a
}

/// Random invertible `p x p` two-tap shaping bank `2I + (G0 + G1 e^{-jω}) / 2`, with unit-Frobenius `G_k`.
pub fn random_shaping(grid: FrequencyGrid, p: usize, seed: u64) -> Result<PeriodicMatrixFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tap = || {
        let g = CMat::from_fn(p, p, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let n = g.norm();
        g / C64::new(n, 0.0)
    };
    let (g0, g1) = (tap(), tap());
    PeriodicMatrixFunction::from_fn(grid, p, p, |_, w| {
        CMat::identity(p, p) * C64::new(2.0, 0.0) + (&g0 + &g1 * C64::from_polar(1.0, -w)) * C64::new(0.5, 0.0)
    })
}

/// Random invertible diagonal `z_i(ω) = 1 + u_i e^{-jω} / 2` with `|u_i| <= 1`.
pub fn random_diagonal(grid: FrequencyGrid, m: usize, seed: u64) -> Result<PeriodicMatrixFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<C64> = (0..m)
        .map(|_| C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    PeriodicMatrixFunction::diagonal(grid, m, |_, w| {
        u.iter().map(|&ui| C64::new(1.0, 0.0) + ui * C64::from_polar(0.5, -w)).collect()
    })
}

/// `y(e^{jω}) = W(e^{jω}) A Z(e^{jω}) d(e^{jω})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDesign {
    a: CMat,
    w: PeriodicMatrixFunction,
    z: Option<PeriodicMatrixFunction>,
    matrix_kind: Option<MatrixKind>,
    seed: Option<u64>,
}

impl MeasurementDesign {
    /// Builds and validates a design; `W` and `Z` must be invertible at every grid point.
    pub fn new(a: CMat, w: PeriodicMatrixFunction, z: Option<PeriodicMatrixFunction>, cond_tol: f64) -> Result<Self> {
        let d = Self::from_parts(a, w, z)?;
        d.validate(cond_tol)?;
        Ok(d)
    }

    /// Shape checks only; see [`MeasurementDesign::validate`].
    pub fn from_parts(a: CMat, w: PeriodicMatrixFunction, z: Option<PeriodicMatrixFunction>) -> Result<Self> {
        let (p, m) = a.shape();
        if w.rows() != p || w.cols() != p {
            return Err(Error::Dimension(format!("W is {}x{}, A has {p} rows", w.rows(), w.cols())));
        }
        if let Some(z) = &z {
            if z.rows() != m || z.cols() != m || z.grid() != w.grid() {
                return Err(Error::Dimension(format!("Z is {}x{}, A has {m} columns", z.rows(), z.cols())));
            }
        }
        Ok(Self { a, w, z, matrix_kind: None, seed: None })
    }

    /// `W = I`, no `Z`.
    pub fn plain(a: CMat, grid: FrequencyGrid) -> Self {
        let p = a.nrows();
        Self { a, w: PeriodicMatrixFunction::identity(grid, p), z: None, matrix_kind: None, seed: None }
    }

    pub fn with_provenance(mut self, kind: Option<MatrixKind>, seed: Option<u64>) -> Self {
        self.matrix_kind = kind;
        self.seed = seed;
        self
    }

    /// Checks invertibility of `W` and of every diagonal entry of `Z`.
    pub fn validate(&self, cond_tol: f64) -> Result<()> {
        self.w.check_invertible(cond_tol)?;
        if let Some(z) = &self.z {
            if !z.is_diagonal() {
                return Err(Error::InvalidInput("Z must be diagonal at every grid point".into()));
            }
            for (q, zq) in z.values().iter().enumerate() {
                let mags: Vec<f64> = zq.diagonal().iter().map(|v| v.norm()).collect();
                let hi = mags.iter().copied().fold(0.0, f64::max);
                if let Some(lo) = mags.iter().copied().reduce(f64::min) {
                    if lo < 1.0 / cond_tol || hi / lo > cond_tol {
                        return Err(Error::SingularOperator { q, cond: hi / lo, limit: cond_tol });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn w(&self) -> &PeriodicMatrixFunction {
        &self.w
    }

    pub fn z(&self) -> Option<&PeriodicMatrixFunction> {
        self.z.as_ref()
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.w.grid()
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix_kind(&self) -> Option<MatrixKind> {
        self.matrix_kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Replaces `W`, keeping `A` and `Z`.
    pub fn with_shaping(&self, w: PeriodicMatrixFunction) -> Result<Self> {
        let mut d = Self::from_parts(self.a.clone(), w, self.z.clone())?;
        d.matrix_kind = self.matrix_kind;
        d.seed = self.seed;
        Ok(d)
    }

    /// Replaces `Z`, keeping `A` and `W`.
    pub fn with_diagonal(&self, z: Option<PeriodicMatrixFunction>) -> Result<Self> {
        let mut d = Self::from_parts(self.a.clone(), self.w.clone(), z)?;
        d.matrix_kind = self.matrix_kind;
        d.seed = self.seed;
        Ok(d)
    }

    /// Combined operator `W(e^{jω}) A Z(e^{jω})`.
    pub fn operator(&self) -> Result<PeriodicMatrixFunction> {
        let wa = self.w.mul_const(&self.a)?;
        match &self.z {
            Some(z) => wa.mul(z),
            None => Ok(wa),
        }
    }
}

/// `v(ω) = conj(M_HA^{-1}(e^{jωT})) h(ω)`, the unique set in span{h} biorthogonal to `a_gen`.
pub fn biorthogonalize(h: &GeneratorSet, a_gen: &GeneratorSet, cond_tol: f64) -> Result<GeneratorSet> {
    if h.channels() != a_gen.channels() {
        return Err(Error::Dimension(format!(
            "{} analysis filters for {} generators",
            h.channels(),
            a_gen.channels()
        )));
    }
    let m_ha = cross_spectrum_matrix(h, a_gen)?;
    let inv = m_ha.inverse(cond_tol)?;
    h.recombine(&inv.map(conj)?)
}

/// Sampling filters `s(ω) = conj(W(e^{jωT}) A Z(e^{jωT})) v(ω)`, so that `M_SA = W A Z`.
pub fn build_sampling_filters(design: &MeasurementDesign, v: &GeneratorSet) -> Result<GeneratorSet> {
    if v.grid() != design.grid() {
        return Err(Error::Dimension(format!(
            "biorthogonal set on N={} but design on N={}",
            v.grid().len(),
            design.grid().len()
        )));
    }
    if v.channels() != design.m() {
        return Err(Error::Dimension(format!("{} biorthogonal functions for m = {}", v.channels(), design.m())));
    }
    v.recombine(&design.operator()?.map(conj)?)
}

/// Compressed measurements, computed bin by bin as `W (A (Z d))`.
pub fn compressive_sample(d: &CoefficientBank, design: &MeasurementDesign) -> Result<MeasurementBank> {
    if d.channels() != design.m() || d.len() != design.grid().len() {
        return Err(Error::Dimension(format!(
            "{} channels of length {} for a design with m = {} on N = {}",
            d.channels(),
            d.len(),
            design.m(),
            design.grid().len()
        )));
    }
    let spectra = dft::forward_all(d.sequences());
    let n = d.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; design.p()];
    for q in 0..n {
        let mut x = CVec::from_iterator(d.channels(), spectra.iter().map(|s| s[q]));
        if let Some(z) = design.z() {
            x = z.at(q) * x;
        }
        let y = design.w().at(q) * (design.a() * x);
        for (i, v) in y.iter().enumerate() {
            out[i][q] = *v;
        }
    }
    MeasurementBank::new(dft::inverse_all(&out))
}
