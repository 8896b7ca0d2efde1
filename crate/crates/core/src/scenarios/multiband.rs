use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, C64, ZERO};
use crate::sampling_design::{build_sampling_filters, compressive_sample, fourier_rows, MeasurementDesign};
use crate::si_core::{
    cross_spectrum_matrix, FrequencyGrid, GeneratorSet, MeasurementBank, PeriodicMatrixFunction,
};
use crate::sparse_model::{synthesize, AmplitudeDist, SparseSISignal, SparsityProfile};
use crate::tolerances::Tolerances;

use super::derive_seed;

/// Points of the dense frequency sweep in [`delay_filter_equivalence_check`].
pub const DELAY_CHECK_POINTS: usize = 512;

fn default_len() -> usize {
    32
}

/// Multicoset sampling of a signal made of a few bands inside `[0, 2π/T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultibandScenario {
    pub n_bands: usize,
    /// Largest band width in rad/s.
    #[serde(rename = "b")]
    pub band_width: f64,
    /// Number of spectral slices.
    pub m: usize,
    /// Nyquist period.
    #[serde(rename = "t")]
    pub nyquist_period: f64,
    /// Sampling delays `c_i` in units of `T`, distinct modulo `m`.
    #[serde(rename = "coset_offsets")]
    pub cosets: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Samples per coset.
    #[serde(default = "default_len")]
    pub n: usize,
    #[serde(default)]
    pub amplitude: AmplitudeDist,
}

impl MultibandScenario {
    pub fn validate(&self) -> Result<()> {
        let (m, t, b) = (self.m, self.nyquist_period, self.band_width);
        if m == 0 || self.n == 0 {
            return Err(Error::InvalidInput("m and n must be at least 1".into()));
        }
        if !(t.is_finite() && t > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::InvalidInput(format!("T = {t} and B = {b} must be positive")));
        }
        if m as f64 > TAU / (b * t) * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "m = {m} exceeds 2π/(BT) = {}; a band could cover more than two slices",
                TAU / (b * t)
            )));
        }
        if 2 * self.n_bands > m {
            return Err(Error::InvalidInput(format!("{} bands may need more than m = {m} slices", self.n_bands)));
        }
        if self.cosets.is_empty() || self.cosets.len() > m {
            return Err(Error::InvalidInput(format!("need 1..={m} cosets, got {}", self.cosets.len())));
        }
        if let Some(&c) = self.cosets.iter().find(|&&c| c > m) {
            return Err(Error::InvalidInput(format!("coset offset {c} outside 0..={m}")));
        }
        let residues: BTreeSet<usize> = self.cosets.iter().map(|c| c % m).collect();
        if residues.len() != self.cosets.len() {
            return Err(Error::InvalidInput(format!("coset offsets {:?} repeat modulo {m}", self.cosets)));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.cosets.len()
    }

    /// Largest number of active slices, `2 n_bands`.
    pub fn k_max(&self) -> usize {
        2 * self.n_bands
    }
}

/// Everything produced for one multiband scenario.
#[derive(Debug, Clone)]
pub struct MultibandBuild {
    pub scenario: MultibandScenario,
    /// Slices `A_l(ω) = sqrt(mT)` on `[2πl/(mT), 2π(l+1)/(mT))`, period `mT`.
    pub generators: GeneratorSet,
    /// Equal to the generators, which are orthonormal.
    pub biorthogonal: GeneratorSet,
    /// `s = conj(W A) v`.
    pub filters: GeneratorSet,
    /// Point samplers `S_i(ω) = e^{-j c_i ω T}` restricted to `[0, 2π/T)`.
    pub delay_filters: GeneratorSet,
    pub design: MeasurementDesign,
    pub signal: SparseSISignal,
    /// Band edges `[lo, hi)` in rad/s.
    pub bands: Vec<(f64, f64)>,
}

impl MultibandBuild {
    pub fn measurements(&self) -> Result<MeasurementBank> {
        compressive_sample(self.signal.coefficients(), &self.design)
    }

    pub fn active_slices(&self) -> &BTreeSet<usize> {
        self.signal.profile().support()
    }
}

/// `W_i(e^{jθ}) = e^{j c θ / m} / sqrt(T)` for `θ` in `[0, 2π)`.
fn shaping_entry(c: usize, m: usize, t: f64, theta: f64) -> C64 {
    C64::from_polar(1.0 / t.sqrt(), c as f64 * theta / m as f64)
}

pub fn build_multiband(sc: &MultibandScenario) -> Result<MultibandBuild> {
    sc.validate()?;
    let (m, t) = (sc.m, sc.nyquist_period);
    let period = m as f64 * t;
    let grid = FrequencyGrid::new(sc.n)?;
    let alias: Vec<i64> = (0..m as i64).map(|j| -j).collect();
    let height = period.sqrt();

    // Alias -l of any grid point falls in slice l.
    let generators = GeneratorSet::spectral(period, grid, alias.clone(), m, |l, _, j| {
        if -j == l as i64 {
            C64::new(height, 0.0)
        } else {
            ZERO
        }
    })?
    .with_spectrum(std::sync::Arc::new(move |l, w| {
        let slice = (w * period / TAU).floor();
        if slice == l as f64 {
            C64::new(height, 0.0)
        } else {
            ZERO
        }
    }));
    let cosets = sc.cosets.clone();
    let delay_filters = GeneratorSet::spectral(period, grid, alias, cosets.len(), |i, q, j| {
        // ωT = (ω_q - 2πj)/m, inside [0, 2π) for every alias in the support.
        C64::from_polar(1.0, -(cosets[i] as f64) * (grid.omega(q) - TAU * j as f64) / m as f64)
    })?;

    let a = fourier_rows(m, &sc.cosets)?;
    let w = PeriodicMatrixFunction::diagonal(grid, sc.p(), |_, theta| {
        sc.cosets.iter().map(|&c| shaping_entry(c, m, t, theta)).collect()
    })?;
    let design = MeasurementDesign::new(a, w, None, Tolerances::default().cond_tol)?;
    let biorthogonal = generators.clone();
    let filters = build_sampling_filters(&design, &biorthogonal)?;

    let (bands, active) = place_bands(sc);
    let profile = SparsityProfile::new(m, active)?;
    let coefficients = synthesize(&profile, sc.n, derive_seed(sc.seed, 2), sc.amplitude)?;
    let signal = SparseSISignal::new(profile, coefficients, generators.clone())?;

    Ok(MultibandBuild { scenario: sc.clone(), generators, biorthogonal, filters, delay_filters, design, signal, bands })
}

/// Draws band positions and returns the covering slices; each band meets at most two.
fn place_bands(sc: &MultibandScenario) -> (Vec<(f64, f64)>, BTreeSet<usize>) {
    let m = sc.m;
    let slice_width = TAU / (m as f64 * sc.nyquist_period);
    let width = (sc.band_width / slice_width).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(sc.seed, 1));
    let mut bands = Vec::with_capacity(sc.n_bands);
    let mut active = BTreeSet::new();
    for _ in 0..sc.n_bands {
        let lo = rng.random_range(0.0..(m as f64 - width));
        let hi = lo + width;
        let first = lo.floor() as usize;
        let last = ((hi.ceil() as usize).max(first + 1) - 1).min(m - 1);
        active.extend(first..=last);
        bands.push((lo * slice_width, hi * slice_width));
    }
    (bands, active)
}

/// Deviation of the composed filters from the point samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayFilterReport {
    /// `max_i max_ω |G_i(ω) - e^{-j c_i ω T}|` on the dense sweep.
    pub dense_deviation: f64,
    /// `max_q |M_{S_delay A} - W A|` on the design grid.
    pub grid_deviation: f64,
    pub points: usize,
}

/// Evaluates `G_i(ω) = conj(W_i(e^{jωmT})) sum_l conj(A_il) A_l(ω)` at `ω = 2πk/(P T)`,
/// `k = 0..P`, and compares with `e^{-j c_i ω T}`. Also checks that the point samplers
/// realise `M_SA = W A` at every grid point.
pub fn delay_filter_equivalence_check(build: &MultibandBuild, points: usize) -> Result<DelayFilterReport> {
    if points == 0 {
        return Err(Error::InvalidInput("need at least one frequency point".into()));
    }
    let sc = &build.scenario;
    let (m, t) = (sc.m, sc.nyquist_period);
    let a = build.design.a();
    let mut dense_deviation: f64 = 0.0;
    for k in 0..points {
        // Slice index and ωmT reduced modulo 2π, both from integer arithmetic.
        let slice = k * m / points;
        let theta = TAU * (k * m - slice * points) as f64 / points as f64;
        for (i, &c) in sc.cosets.iter().enumerate() {
            let sum: C64 = (0..m).map(|l| a[(i, l)].conj() * slice_value(build, l, slice)).sum();
            let g = shaping_entry(c, m, t, theta).conj() * sum;
            let target = C64::from_polar(1.0, -TAU * (c * k) as f64 / points as f64);
            dense_deviation = dense_deviation.max((g - target).norm());
        }
    }
    let m_sa = cross_spectrum_matrix(&build.delay_filters, &build.generators)?;
    let wa = build.design.operator()?;
    let grid_deviation =
        m_sa.values().iter().zip(wa.values()).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max);
    Ok(DelayFilterReport { dense_deviation, grid_deviation, points })
}

/// `A_l` on slice `slice`, read from the generator's closed form at the slice midpoint.
fn slice_value(build: &MultibandBuild, l: usize, slice: usize) -> C64 {
    let period = build.generators.period();
    build.generators.spectrum(l, TAU * (slice as f64 + 0.5) / period).expect("slices carry a closed form")
}

/// Fractional delay by `c/m` samples with gain `1/sqrt(T)`, realised in time: upsample by `m`,
/// ideal low-pass keeping `[0, 2π/m)` with gain `m`, circular shift by `c`, downsample by `m`.
pub fn fractional_delay_demodulate(y: &[C64], c: usize, m: usize, t: f64) -> Result<Vec<C64>> {
    if y.is_empty() || m == 0 {
        return Err(Error::InvalidInput("need a non-empty sequence and m >= 1".into()));
    }
    let n = y.len();
    let len = n * m;
    let mut up = vec![ZERO; len];
    for (k, &v) in y.iter().enumerate() {
        up[k * m] = v;
    }
    let mut spec = dft::forward(&up);
    for (r, z) in spec.iter_mut().enumerate() {
        *z = if r < n { *z * m as f64 } else { ZERO };
    }
    let filtered = dft::inverse(&spec);
    let scale = 1.0 / t.sqrt();
    Ok((0..n).map(|k| filtered[(k * m + len - c % len) % len] * scale).collect())
}

/// The same delay applied by multiplying DFT bin `q` by `e^{-j c ω_q / m} / sqrt(T)`, `ω_q` in `[0, 2π)`.
pub fn fractional_delay_frequency(y: &[C64], c: usize, m: usize, t: f64) -> Result<Vec<C64>> {
    if y.is_empty() || m == 0 {
        return Err(Error::InvalidInput("need a non-empty sequence and m >= 1".into()));
    }
    let grid = FrequencyGrid::new(y.len())?;
    let scale = 1.0 / t.sqrt();
    let spec: Vec<C64> = dft::forward(y)
        .into_iter()
        .enumerate()
        .map(|(q, z)| z * C64::from_polar(scale, -(c as f64) * grid.omega(q) / m as f64))
        .collect();
    Ok(dft::inverse(&spec))
}

/// Applies [`fractional_delay_demodulate`] to every coset of a measurement bank.
pub fn demodulate_cosets(y: &MeasurementBank, sc: &MultibandScenario) -> Result<MeasurementBank> {
    let out = sc
        .cosets
        .iter()
        .enumerate()
        .map(|(i, &c)| fractional_delay_demodulate(y.channel(i), c, sc.m, sc.nyquist_period))
        .collect::<Result<Vec<_>>>()?;
    MeasurementBank::new(out)
}
