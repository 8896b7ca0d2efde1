use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use si_subnyq_core::ctf::{nmse, recover, CtfOptions};
use si_subnyq_core::sampling_design::{kruskal_rank, random_diagonal, random_shaping, sensing_matrix, KRUSKAL_MAX_COLUMNS};
use si_subnyq_core::scenarios::{build_multiband, build_periodic_sparsity, derive_seed};
use si_subnyq_core::sparse_model::synthesize;
use si_subnyq_core::{
    compressive_sample, CMat, CoefficientBank, FrequencyGrid, MeasurementBank, MeasurementDesign, SparsityProfile,
};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Result};

/// Exact CSV header of the per-trial file.
pub const TRIALS_HEADER: &str = "trial,seed,support_true,support_found,exact,nmse,rank_q,sigma_a,wall_time_s";

/// Success requires the exact support and `nmse` at most this.
pub const SUCCESS_NMSE: f64 = 1e-9;

/// Redraws allowed when `min_spark` is set.
const MAX_REDRAWS: u64 = 1000;

/// Seed of trial `trial`: the splitmix64 finalizer of `master + trial * golden_gamma`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, trial as u64)
}

/// Outcome of one trial. Supports are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub support_true: BTreeSet<usize>,
    pub support_found: BTreeSet<usize>,
    pub support_exact: bool,
    /// `||d_hat - d||^2 / ||d||^2`; infinite when recovery errored.
    pub nmse: f64,
    pub rank_q: usize,
    pub sigma_a: Option<usize>,
    pub wall_time_s: f64,
    /// Relative residual of the chosen support, used to spot alternative fits.
    #[serde(skip)]
    pub residual: f64,
}

impl TrialRecord {
    pub fn success(&self) -> bool {
        self.support_exact && self.nmse <= SUCCESS_NMSE
    }

    /// A wrong support that still explains the measurements exactly.
    pub fn is_collision(&self, residual_tol: f64) -> bool {
        !self.support_exact && self.nmse.is_finite() && self.residual <= residual_tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub success_rate: f64,
    pub median_nmse: f64,
    pub trials: usize,
    pub successes: usize,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Caps worker threads at `SI_SUBNYQ_THREADS` when set and nonzero.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("SI_SUBNYQ_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::Config(format!("SI_SUBNYQ_THREADS='{v}': {e}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Runs every trial; rows come back in trial order whatever the completion order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.mode == Mode::Verify {
        return Err(CliError::Config("mode: verify configs are run with the verify command".into()));
    }
    let records = thread_pool()?.install(|| {
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(cfg, &records);
    Ok(RunOutput { records, summary })
}

pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Summary {
    let successes = records.iter().filter(|r| r.success()).count();
    let mut errors: Vec<f64> = records.iter().map(|r| r.nmse).collect();
    errors.sort_by(f64::total_cmp);
    Summary {
        success_rate: successes as f64 / records.len().max(1) as f64,
        median_nmse: median(&errors),
        trials: records.len(),
        successes,
        config: cfg.clone(),
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

struct Instance {
    design: MeasurementDesign,
    truth: CoefficientBank,
    y: MeasurementBank,
    k_max: usize,
}

pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.seed, trial);
    let start = Instant::now();
    let inst = match cfg.mode {
        Mode::Generic => generic_instance(cfg, seed)?,
        Mode::PeriodicSparsity => {
            let mut sc = cfg.periodic_sparsity.clone().expect("validated");
            sc.seed = seed;
            let b = build_periodic_sparsity(&sc)?;
            let y = b.measurements()?;
            Instance { design: b.design, truth: b.signal.coefficients().clone(), y, k_max: sc.k }
        }
        Mode::Multiband => {
            let mut sc = cfg.multiband.clone().expect("validated");
            sc.seed = seed;
            let b = build_multiband(&sc)?;
            let y = b.measurements()?;
            Instance { design: b.design, truth: b.signal.coefficients().clone(), y, k_max: sc.k_max() }
        }
        Mode::Verify => unreachable!("rejected by run_trials"),
    };
    let sigma_a = (inst.design.m() <= KRUSKAL_MAX_COLUMNS)
        .then(|| kruskal_rank(inst.design.a(), cfg.tolerances.svd_rank_tol))
        .transpose()?;
    let opts = CtfOptions { solver: cfg.solver, tolerances: cfg.tolerances, ..CtfOptions::default() };
    let one_based = |s: &BTreeSet<usize>| s.iter().map(|i| i + 1).collect::<BTreeSet<_>>();
    let support_true = one_based(inst.truth.support());
    let (support_found, err, rank_q, residual) = match recover(&inst.y, &inst.design, inst.k_max, &opts) {
        Ok(r) => (one_based(&r.support), nmse(&r.coefficients, &inst.truth)?, r.diagnostics.rank_q, r.diagnostics.residual),
        Err(_) => (BTreeSet::new(), f64::INFINITY, 0, f64::INFINITY),
    };
    let wall_time_s = if cfg.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
    Ok(TrialRecord {
        trial,
        seed,
        support_exact: support_found == support_true,
        support_true,
        support_found,
        nmse: err,
        rank_q,
        sigma_a,
        wall_time_s,
        residual,
    })
}

fn generic_instance(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let grid = FrequencyGrid::new(cfg.n)?;
    let draw = |attempt: u64| sensing_matrix(cfg.matrix_kind, cfg.p, cfg.m, derive_seed(seed, 10 + attempt));
    let a: CMat = match cfg.min_spark {
        None => draw(0)?,
        Some(target) => {
            let mut found = None;
            for attempt in 0..MAX_REDRAWS {
                let a = draw(attempt)?;
                if kruskal_rank(&a, cfg.tolerances.svd_rank_tol)? >= target {
                    found = Some(a);
                    break;
                }
            }
            found.ok_or_else(|| {
                CliError::Config(format!("min_spark: no {} x {} draw reached {target}", cfg.p, cfg.m))
            })?
        }
    };
    let mut design = MeasurementDesign::plain(a, grid).with_provenance(Some(cfg.matrix_kind), Some(seed));
    if cfg.shaping {
        design = design.with_shaping(random_shaping(grid, cfg.p, derive_seed(seed, 1))?)?;
    }
    if cfg.diagonal {
        design = design.with_diagonal(Some(random_diagonal(grid, cfg.m, derive_seed(seed, 2))?))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let profile = SparsityProfile::random(cfg.m, cfg.k, &mut rng)?;
    let truth = synthesize(&profile, cfg.n, derive_seed(seed, 4), cfg.amplitude)?;
    let y = compressive_sample(&truth, &design)?;
    Ok(Instance { design, truth, y, k_max: cfg.k })
}

fn join(s: &BTreeSet<usize>) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

/// Per-trial CSV; supports are `;`-separated 1-based indices.
pub fn trials_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRIALS_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            join(&r.support_true),
            join(&r.support_found),
            r.support_exact.to_string(),
            r.nmse.to_string(),
            r.rank_q.to_string(),
            r.sigma_a.map_or(String::new(), |s| s.to_string()),
            r.wall_time_s.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| CliError::Output { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(wrap)?;
    }
    let mut f = fs::File::create(path).map_err(wrap)?;
    f.write_all(bytes).map_err(wrap)
}

/// Runs and writes the trial CSV and the JSON summary; returns their paths.
pub fn run(cfg: &ExperimentConfig) -> Result<(RunOutput, PathBuf, PathBuf)> {
    let out = run_trials(cfg)?;
    let csv_path = cfg.output.dir.join(&cfg.output.trials_csv);
    let json_path = cfg.output.dir.join(&cfg.output.summary_json);
    write_file(&csv_path, &trials_csv(&out.records)?)?;
    let mut json = serde_json::to_vec_pretty(&out.summary)?;
    json.push(b'\n');
    write_file(&json_path, &json)?;
    Ok((out, csv_path, json_path))
}
