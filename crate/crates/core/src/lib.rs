//! Compressive sampling of sparse shift-invariant signals.
//!
//! A signal `x(t) = sum_l sum_n d_l[n] a_l(t - nT)` with only `k` of its `m` coefficient
//! sequences active is sampled by `p < m` filters and recovered from the `p` low-rate
//! sequences. The crate builds the sampling filter banks, produces the measurements and
//! runs the continuous-to-finite recovery chain.
//!
//! Frequency is discretized on an `N`-point grid; sequences have length `N` and are
//! treated circularly, so every frequency-domain identity holds exactly at the grid points.
//! Channel and support indices are 0-based throughout the library.

pub mod combinatorics;
pub mod ctf;
pub mod dft;
pub mod error;
pub mod linalg;
pub mod sampling_design;
pub mod scenarios;
pub mod si_core;
pub mod sparse_model;
pub mod tolerances;

#[cfg(test)]
pub(crate) mod testutil;

pub use ctf::{recover, recover_coefficients, recover_support, CtfOptions, QDomain, RecoveryResult, Solver};
pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use sampling_design::{compressive_sample, MatrixKind, MeasurementDesign};
pub use si_core::{CoefficientBank, FrequencyGrid, GeneratorSet, MeasurementBank, PeriodicMatrixFunction};
pub use sparse_model::{AmplitudeDist, SparseSISignal, SparsityProfile};
pub use tolerances::Tolerances;
