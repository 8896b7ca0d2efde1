use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

use super::grid::{FrequencyGrid, PeriodicMatrixFunction};

/// Continuous-time Fourier transform of channel `l` at radian frequency `omega`.
pub type SpectrumFn = Arc<dyn Fn(usize, f64) -> C64 + Send + Sync>;

/// A compactly supported function that is constant on cells `[(offset+k)δ, (offset+k+1)δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub offset: i64,
    pub taps: Vec<C64>,
}

impl PiecewiseConstant {
    pub fn new(offset: i64, taps: Vec<C64>) -> Self {
        Self { offset, taps }
    }

    /// Unit-height box on a single cell.
    pub fn unit_box(offset: i64) -> Self {
        Self::new(offset, vec![C64::new(1.0, 0.0)])
    }

    pub fn end(&self) -> i64 {
        self.offset + self.taps.len() as i64
    }

    /// Value on cell index `cell`.
    pub fn at(&self, cell: i64) -> C64 {
        let k = cell - self.offset;
        if k < 0 || k >= self.taps.len() as i64 {
            ZERO
        } else {
            self.taps[k as usize]
        }
    }

    /// Linear combination `sum_k weights[k] * parts[k]`.
    pub fn combine(parts: &[&PiecewiseConstant], weights: &[C64]) -> Self {
        let start = parts.iter().map(|p| p.offset).min().unwrap_or(0);
        let end = parts.iter().map(|p| p.end()).max().unwrap_or(0);
        let taps = (start..end)
            .map(|cell| parts.iter().zip(weights).map(|(p, &w)| w * p.at(cell)).sum())
            .collect();
        Self::new(start, taps)
    }

    /// Fourier transform for cell width `step`.
    pub fn spectrum(&self, step: f64, omega: f64) -> C64 {
        let cell = if omega == 0.0 {
            C64::new(step, 0.0)
        } else {
            (C64::new(1.0, 0.0) - C64::from_polar(1.0, -omega * step)) / C64::new(0.0, omega)
        };
        let phases: C64 = self
            .taps
            .iter()
            .enumerate()
            .map(|(k, &v)| v * C64::from_polar(1.0, -omega * step * (self.offset + k as i64) as f64))
            .sum();
        phases * cell
    }
}

#[derive(Clone)]
pub(crate) enum Representation {
    /// Values at `(omega_q - 2 pi j) / T` for every grid point `q` and alias `j`.
    Spectral { alias: Vec<i64>, values: Vec<C64> },
    /// Piecewise-constant functions on cells of width `step`, `steps_per_period * step = T`.
    Piecewise { step: f64, steps_per_period: i64, generators: Vec<PiecewiseConstant> },
}

/// A set of generators `a_l(t)` (or filters) sharing period `T`, described exactly on a frequency grid.
///
/// Spectral sets vanish outside a finite alias support, so alias sums over it are exact. Piecewise
/// sets are compactly supported, so sampled cross-correlations are finite sums.
#[derive(Clone)]
pub struct GeneratorSet {
    period: f64,
    grid: FrequencyGrid,
    channels: usize,
    repr: Representation,
    analytic: Option<SpectrumFn>,
}

impl fmt::Debug for GeneratorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Representation::Spectral { alias, .. } => format!("spectral, aliases {alias:?}"),
            Representation::Piecewise { step, .. } => format!("piecewise, step {step}"),
        };
        f.debug_struct("GeneratorSet")
            .field("period", &self.period)
            .field("grid", &self.grid.len())
            .field("channels", &self.channels)
            .field("kind", &kind)
            .finish()
    }
}

impl GeneratorSet {
    /// Tabulates `f(channel, q, alias_j)` for every grid point and alias index.
    pub fn spectral(
        period: f64,
        grid: FrequencyGrid,
        alias: Vec<i64>,
        channels: usize,
        f: impl Fn(usize, usize, i64) -> C64,
    ) -> Result<Self> {
        check_period(period)?;
        if alias.is_empty() {
            return Err(Error::InvalidInput("alias support must be non-empty".into()));
        }
        let mut sorted = alias.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != alias.len() {
            return Err(Error::InvalidInput(format!("alias support {alias:?} has duplicates")));
        }
        let mut values = Vec::with_capacity(channels * grid.len() * alias.len());
        for ch in 0..channels {
            for q in 0..grid.len() {
                for &j in &alias {
                    values.push(f(ch, q, j));
                }
            }
        }
        Ok(Self { period, grid, channels, repr: Representation::Spectral { alias, values }, analytic: None })
    }

    /// Tabulates an analytic spectrum at the alias points and keeps it for off-grid evaluation.
    pub fn from_spectrum(
        period: f64,
        grid: FrequencyGrid,
        alias: Vec<i64>,
        channels: usize,
        f: impl Fn(usize, f64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let f: SpectrumFn = Arc::new(f);
        let g = f.clone();
        let set = Self::spectral(period, grid, alias, channels, move |ch, q, j| {
            g(ch, alias_frequency(grid, period, q, j))
        })?;
        Ok(set.with_spectrum(f))
    }

    /// Compactly supported piecewise-constant generators.
    pub fn piecewise(
        period: f64,
        step: f64,
        grid: FrequencyGrid,
        generators: Vec<PiecewiseConstant>,
    ) -> Result<Self> {
        check_period(period)?;
        check_period(step)?;
        let ratio = period / step;
        let steps_per_period = ratio.round() as i64;
        if steps_per_period < 1 || (ratio - steps_per_period as f64).abs() > 1e-9 * ratio {
            return Err(Error::InvalidInput(format!(
                "period {period} is not an integer multiple of the cell width {step}"
            )));
        }
        Ok(Self {
            period,
            grid,
            channels: generators.len(),
            repr: Representation::Piecewise { step, steps_per_period, generators },
            analytic: None,
        })
    }

    /// Attaches the analytic spectrum used by [`GeneratorSet::spectrum`].
    pub fn with_spectrum(mut self, f: SpectrumFn) -> Self {
        self.analytic = Some(f);
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn alias_support(&self) -> Option<&[i64]> {
        match &self.repr {
            Representation::Spectral { alias, .. } => Some(alias),
            Representation::Piecewise { .. } => None,
        }
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self.repr, Representation::Piecewise { .. })
    }

    pub fn piecewise_parts(&self) -> Option<(f64, &[PiecewiseConstant])> {
        match &self.repr {
            Representation::Piecewise { step, generators, .. } => Some((*step, generators)),
            Representation::Spectral { .. } => None,
        }
    }

    pub(crate) fn repr(&self) -> &Representation {
        &self.repr
    }

    /// Tabulated value of channel `ch` at `(omega_q - 2 pi alias[j_idx]) / T`.
    pub fn tabulated(&self, ch: usize, q: usize, j_idx: usize) -> Option<C64> {
        match &self.repr {
            Representation::Spectral { alias, values } => {
                Some(values[(ch * self.grid.len() + q) * alias.len() + j_idx])
            }
            Representation::Piecewise { .. } => None,
        }
    }

    /// Fourier transform of channel `ch` at an arbitrary frequency, when known in closed form.
    pub fn spectrum(&self, ch: usize, omega: f64) -> Option<C64> {
        if let Some(f) = &self.analytic {
            return Some(f(ch, omega));
        }
        match &self.repr {
            Representation::Piecewise { step, generators, .. } => Some(generators[ch].spectrum(*step, omega)),
            Representation::Spectral { .. } => None,
        }
    }

    /// New set whose channel `i` is `sum_k coeffs(ω)_{ik} g_k`, with `coeffs` evaluated at `e^{jωT}`.
    ///
    /// Piecewise sets only admit frequency-independent coefficients, since anything else
    /// produces an infinite combination of shifts.
    pub fn recombine(&self, coeffs: &PeriodicMatrixFunction) -> Result<Self> {
        if coeffs.cols() != self.channels || coeffs.grid() != self.grid {
            return Err(Error::Dimension(format!(
                "recombination {}x{} on N={} does not fit {} channels on N={}",
                coeffs.rows(),
                coeffs.cols(),
                coeffs.grid().len(),
                self.channels,
                self.grid.len()
            )));
        }
        let out_channels = coeffs.rows();
        let repr = match &self.repr {
            Representation::Spectral { alias, values } => {
                let nq = self.grid.len();
                let na = alias.len();
                let mut out = vec![ZERO; out_channels * nq * na];
                for i in 0..out_channels {
                    for q in 0..nq {
                        let c = coeffs.at(q);
                        for j in 0..na {
                            out[(i * nq + q) * na + j] =
                                (0..self.channels).map(|k| c[(i, k)] * values[(k * nq + q) * na + j]).sum();
                        }
                    }
                }
                Representation::Spectral { alias: alias.clone(), values: out }
            }
            Representation::Piecewise { step, steps_per_period, generators } => {
                let scale = coeffs.values().iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(1.0, f64::max);
                if coeffs.variation() > 1e-12 * scale {
                    return Err(Error::Unsupported(
                        "piecewise generators can only be recombined with frequency-independent coefficients".into(),
                    ));
                }
                let c = coeffs.at(0);
                let parts: Vec<&PiecewiseConstant> = generators.iter().collect();
                let combined = (0..out_channels)
                    .map(|i| {
                        let w: Vec<C64> = (0..self.channels).map(|k| c[(i, k)]).collect();
                        PiecewiseConstant::combine(&parts, &w)
                    })
                    .collect();
                Representation::Piecewise { step: *step, steps_per_period: *steps_per_period, generators: combined }
            }
        };
        Ok(Self { period: self.period, grid: self.grid, channels: out_channels, repr, analytic: None })
    }
}

/// The continuous frequency `(omega_q - 2 pi j) / T` sampled by alias `j` at grid point `q`.
pub fn alias_frequency(grid: FrequencyGrid, period: f64, q: usize, j: i64) -> f64 {
    (grid.omega(q) - 2.0 * PI * j as f64) / period
}

fn check_period(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("period must be positive and finite, got {t}")))
    }
}
