//! Experiment runner for `si-subnyq-core`: seeded Monte Carlo runs of the sampling and
//! recovery chain, parameter sweeps, and a fixed-seed invariant suite.
//!
//! Trial `t` of a run with master seed `s` uses seed [`runner::trial_seed`]`(s, t)`, so any
//! row of the output can be reproduced alone. Supports in every output are 1-based.

pub mod config;
pub mod error;
pub mod runner;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, Mode, SweepVar};
pub use error::{CliError, Result};
pub use runner::{run, run_trials, trial_seed, TrialRecord, TRIALS_HEADER};
pub use sweep::{sweep, sweep_runs, SWEEP_HEADER};
pub use verify::{verify, Tamper, VerifyReport};
