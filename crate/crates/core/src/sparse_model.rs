//! Sparse shift-invariant signals: only `k` of the `m` coefficient sequences are active.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::si_core::{CoefficientBank, GeneratorSet};

/// Which `k` of `m` generators carry energy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityProfile {
    m: usize,
    support: BTreeSet<usize>,
}

impl SparsityProfile {
    pub fn new(m: usize, support: impl IntoIterator<Item = usize>) -> Result<Self> {
        let support: BTreeSet<usize> = support.into_iter().collect();
        if let Some(&bad) = support.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidInput(format!("support index {bad} out of range for m = {m}")));
        }
        Ok(Self { m, support })
    }

    /// Uniformly random support of size `k`.
    pub fn random(m: usize, k: usize, rng: &mut impl Rng) -> Result<Self> {
        if k > m {
            return Err(Error::InvalidInput(format!("k = {k} exceeds m = {m}")));
        }
        Self::new(m, index::sample(rng, m, k))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }
}

/// Distribution of the active coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeDist {
    /// Real and imaginary parts i.i.d. N(0, 1/2).
    #[default]
    ComplexGaussian,
    RealGaussian,
    /// Unit modulus, uniform phase.
    UnitModulus,
}

impl AmplitudeDist {
    fn draw(self, rng: &mut impl Rng) -> C64 {
        match self {
            Self::ComplexGaussian => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                C64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
            }
            Self::RealGaussian => C64::new(rng.sample(StandardNormal), 0.0),
            Self::UnitModulus => C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
        }
    }
}

/// Seeded coefficient bank supported exactly on `profile`.
pub fn synthesize(profile: &SparsityProfile, n: usize, seed: u64, dist: AmplitudeDist) -> Result<CoefficientBank> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seqs = vec![vec![ZERO; n]; profile.m()];
    for &l in profile.support() {
        loop {
            let draw: Vec<C64> = (0..n).map(|_| dist.draw(&mut rng)).collect();
            if draw.iter().any(|&z| z != ZERO) {
                seqs[l] = draw;
                break;
            }
        }
    }
    CoefficientBank::new(seqs)
}

/// `x(t) = sum_l sum_n d_l[n] a_l(t - nT)` with a known active set.
#[derive(Debug, Clone)]
pub struct SparseSISignal {
    profile: SparsityProfile,
    coefficients: CoefficientBank,
    generators: GeneratorSet,
}

impl SparseSISignal {
    pub fn new(profile: SparsityProfile, coefficients: CoefficientBank, generators: GeneratorSet) -> Result<Self> {
        if coefficients.channels() != generators.channels() || profile.m() != generators.channels() {
            return Err(Error::Dimension(format!(
                "{} coefficient channels, profile over {}, {} generators",
                coefficients.channels(),
                profile.m(),
                generators.channels()
            )));
        }
        if coefficients.support() != profile.support() {
            return Err(Error::InvalidInput(format!(
                "coefficient support {:?} differs from profile {:?}",
                coefficients.support(),
                profile.support()
            )));
        }
        Ok(Self { profile, coefficients, generators })
    }

    pub fn profile(&self) -> &SparsityProfile {
        &self.profile
    }

    pub fn coefficients(&self) -> &CoefficientBank {
        &self.coefficients
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }
}

/// `X(ω) = sum_l D_l(e^{jωT}) A_l(ω)`; needs generators with a closed-form spectrum.
pub fn signal_spectrum(x: &SparseSISignal, omega: f64) -> Result<C64> {
    let t = x.generators.period();
    let mut acc = ZERO;
    for l in 0..x.coefficients.channels() {
        let a = x
            .generators
            .spectrum(l, omega)
            .ok_or_else(|| Error::Unsupported("generator set has no closed-form spectrum".into()))?;
        acc += dft::dtft(x.coefficients.channel(l), 0, omega * t) * a;
    }
    Ok(acc)
}
