//! The two worked configurations: a single-generator signal with periodic sparsity, and
//! multicoset sampling of a multiband signal. Both feed the generic sampling and recovery
//! chain; nothing here recovers signals on its own.

mod multiband;
mod periodic;

pub use multiband::{
    build_multiband, delay_filter_equivalence_check, demodulate_cosets, fractional_delay_demodulate,
    fractional_delay_frequency, DelayFilterReport, MultibandBuild, MultibandScenario, DELAY_CHECK_POINTS,
};
pub use periodic::{
    active_base_indices, build_periodic_sparsity, interleave, piecewise_constant_waveform_check, BaseGenerator,
    PeriodicSparsityBuild, PeriodicSparsityScenario, RateAccounting, WaveformReport, QUADRATURE_STEPS, WAVEFORM_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// A scenario as read from JSON, tagged by `"scenario"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioConfig {
    PeriodicSparsity(PeriodicSparsityScenario),
    Multiband(MultibandScenario),
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Independent sub-seed for stream `stream` of a scenario seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix from rows of `[re, im]` pairs.
pub fn complex_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}
