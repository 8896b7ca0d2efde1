use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::{ExperimentConfig, SweepVar};
use crate::error::Result;
use crate::runner::{run_trials, write_file, Summary};

pub const SWEEP_HEADER: &str = "value,success_rate,median_nmse,trials";

/// A trial whose recovered support differs from the truth yet fits the measurements exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collision {
    pub value: usize,
    pub trial: usize,
    pub seed: u64,
    pub support_true: BTreeSet<usize>,
    pub support_found: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: usize,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub var: SweepVar,
    pub points: Vec<SweepPoint>,
    pub collisions: Vec<Collision>,
}

/// One full run per value, in the order given.
pub fn sweep_runs(cfg: &ExperimentConfig, var: SweepVar, values: &[usize]) -> Result<SweepOutput> {
    let mut points = Vec::with_capacity(values.len());
    let mut collisions = Vec::new();
    for &value in values {
        let point_cfg = var.apply(cfg, value)?;
        let out = run_trials(&point_cfg)?;
        collisions.extend(out.records.iter().filter(|r| r.is_collision(point_cfg.tolerances.residual_tol)).map(|r| {
            Collision {
                value,
                trial: r.trial,
                seed: r.seed,
                support_true: r.support_true.clone(),
                support_found: r.support_found.clone(),
            }
        }));
        points.push(SweepPoint { value, summary: out.summary });
    }
    Ok(SweepOutput { var, points, collisions })
}

pub fn sweep_csv(out: &SweepOutput) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER.split(','))?;
    for p in &out.points {
        w.write_record([
            p.value.to_string(),
            p.summary.success_rate.to_string(),
            p.summary.median_nmse.to_string(),
            p.summary.trials.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| crate::error::CliError::Csv(e.into_error().into()))
}

/// Writes `sweep_<var>.csv` and `sweep_<var>_collisions.json` under the output directory.
pub fn sweep(cfg: &ExperimentConfig, var: SweepVar, values: &[usize]) -> Result<(SweepOutput, PathBuf, PathBuf)> {
    let out = sweep_runs(cfg, var, values)?;
    let csv_path = cfg.output.dir.join(format!("sweep_{}.csv", var.name()));
    let json_path = cfg.output.dir.join(format!("sweep_{}_collisions.json", var.name()));
    write_file(&csv_path, &sweep_csv(&out)?)?;
    let mut json = serde_json::to_vec_pretty(&out.collisions)?;
    json.push(b'\n');
    write_file(&json_path, &json)?;
    Ok((out, csv_path, json_path))
}
