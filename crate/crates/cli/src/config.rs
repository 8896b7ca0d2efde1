use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use si_subnyq_core::scenarios::{MultibandScenario, PeriodicSparsityScenario};
use si_subnyq_core::{AmplitudeDist, MatrixKind, Solver, Tolerances};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Generic,
    PeriodicSparsity,
    Multiband,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub trials_csv: String,
    pub summary_json: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { dir: PathBuf::from("results"), trials_csv: "trials.csv".into(), summary_json: "summary.json".into() }
    }
}

/// One experiment. Generic mode draws a fresh design and support per trial from `m, k, p, N`;
/// the scenario modes take their parameters from the matching block and reseed it per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub m: usize,
    pub k: usize,
    pub p: usize,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub matrix_kind: MatrixKind,
    pub solver: Solver,
    pub amplitude: AmplitudeDist,
    /// Redraw `A` until its Kruskal rank reaches this value.
    pub min_spark: Option<usize>,
    /// Random invertible `W(e^{jω})` instead of the identity.
    pub shaping: bool,
    /// Random diagonal `Z(e^{jω})`.
    pub diagonal: bool,
    pub tolerances: Tolerances,
    /// Write measured wall time per trial; off by default so outputs are byte-reproducible.
    pub record_timing: bool,
    pub output: OutputPaths,
    pub periodic_sparsity: Option<PeriodicSparsityScenario>,
    pub multiband: Option<MultibandScenario>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Generic,
            m: 6,
            k: 2,
            p: 4,
            n: 32,
            seed: 0,
            trials: 1,
            matrix_kind: MatrixKind::Gaussian,
            solver: Solver::Exhaustive,
            amplitude: AmplitudeDist::ComplexGaussian,
            min_spark: None,
            shaping: false,
            diagonal: false,
            tolerances: Tolerances::default(),
            record_timing: false,
            output: OutputPaths::default(),
            periodic_sparsity: None,
            multiband: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return bad("trials: must be at least 1".into());
        }
        match self.mode {
            Mode::Generic => {
                if self.m == 0 || self.p == 0 || self.n == 0 {
                    return bad(format!("m, p, N: must be at least 1 (got {}, {}, {})", self.m, self.p, self.n));
                }
                if self.p > self.m {
                    return bad(format!("p: {} exceeds m = {}", self.p, self.m));
                }
                if self.k > self.m {
                    return bad(format!("k: {} exceeds m = {}", self.k, self.m));
                }
                if let Some(s) = self.min_spark {
                    if s > self.p {
                        return bad(format!("min_spark: {s} exceeds p = {}", self.p));
                    }
                }
            }
            Mode::PeriodicSparsity => match &self.periodic_sparsity {
                Some(sc) => sc.validate().map_err(|e| CliError::Config(format!("periodic_sparsity: {e}")))?,
                None => return bad("periodic_sparsity: block required in this mode".into()),
            },
            Mode::Multiband => match &self.multiband {
                Some(sc) => sc.validate().map_err(|e| CliError::Config(format!("multiband: {e}")))?,
                None => return bad("multiband: block required in this mode".into()),
            },
            Mode::Verify => {}
        }
        Ok(())
    }

    /// Alphabet size of the support, used to bound reported indices.
    pub fn channels(&self) -> usize {
        match self.mode {
            Mode::PeriodicSparsity => self.periodic_sparsity.as_ref().map_or(0, |s| s.m),
            Mode::Multiband => self.multiband.as_ref().map_or(0, |s| s.m),
            _ => self.m,
        }
    }
}

/// Variable changed by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    P,
    K,
    N,
}

impl std::str::FromStr for SweepVar {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Self::P),
            "k" => Ok(Self::K),
            "N" | "n" => Ok(Self::N),
            other => Err(CliError::Config(format!("sweep variable '{other}' is not one of p, k, N"))),
        }
    }
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::P => "p",
            Self::K => "k",
            Self::N => "N",
        }
    }

    /// Copy of `cfg` with this variable set to `value`; scenario modes update their block.
    pub fn apply(self, cfg: &ExperimentConfig, value: usize) -> Result<ExperimentConfig> {
        let mut out = cfg.clone();
        match (cfg.mode, self) {
            (Mode::Generic, Self::P) => out.p = value,
            (Mode::Generic, Self::K) => out.k = value,
            (Mode::Generic, Self::N) => out.n = value,
            (Mode::PeriodicSparsity, Self::P | Self::N) if out.periodic_sparsity.is_some() => {
                let sc = out.periodic_sparsity.as_mut().expect("checked above");
                if self == Self::P {
                    sc.p = value;
                } else {
                    sc.n_blocks = value;
                }
            }
            (Mode::Multiband, Self::N) if out.multiband.is_some() => {
                out.multiband.as_mut().expect("checked above").n = value;
            }
            (mode, var) => {
                return Err(CliError::Config(format!("cannot sweep {} in {mode:?} mode", var.name())));
            }
        }
        out.validate()?;
        Ok(out)
    }
}

/// Parses a comma-separated list of non-negative integers.
pub fn parse_values(text: &str) -> Result<Vec<usize>> {
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| CliError::Config(format!("values: '{s}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::Config("values: empty list".into()));
    }
    Ok(values)
}
