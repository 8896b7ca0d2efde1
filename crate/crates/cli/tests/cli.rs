use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use si_subnyq_cli::verify::check_names;
use si_subnyq_cli::{run_trials, sweep_runs, ExperimentConfig, SweepVar, TRIALS_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_si-subnyq"))
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path
}

fn run_cli(config: &Path, out_dir: &Path) -> Output {
    bin().args(["run", "--config"]).arg(config).arg("--out-dir").arg(out_dir).output().unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn zero_sparsity_recovers_the_zero_signal() {
    let cfg = ExperimentConfig::from_json(r#"{"m": 6, "k": 0, "p": 4, "N": 8, "trials": 5}"#).unwrap();
    let out = run_trials(&cfg).unwrap();
    assert_eq!(out.summary.success_rate, 1.0);
    for r in &out.records {
        assert!(r.support_true.is_empty() && r.support_found.is_empty());
        assert_eq!(r.nmse, 0.0);
        assert_eq!(r.rank_q, 0);
    }
}

#[test]
fn full_spark_designs_recover_every_trial() {
    let cfg = ExperimentConfig::from_json(
        r#"{"m": 6, "k": 2, "p": 4, "N": 16, "trials": 20, "seed": 7, "min_spark": 4}"#,
    )
    .unwrap();
    let out = run_trials(&cfg).unwrap();
    assert_eq!(out.summary.success_rate, 1.0, "{:?}", out.records);
    assert!(out.records.iter().all(|r| r.sigma_a == Some(4) && r.rank_q == 2));
}

#[test]
fn shaped_and_diagonal_designs_recover() {
    let cfg = ExperimentConfig::from_json(
        r#"{"m": 7, "k": 2, "p": 4, "N": 8, "trials": 10, "seed": 3, "min_spark": 4,
            "shaping": true, "diagonal": true}"#,
    )
    .unwrap();
    assert_eq!(run_trials(&cfg).unwrap().summary.success_rate, 1.0);
}

#[test]
fn run_writes_header_and_reproducible_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), r#"{"m": 6, "k": 2, "p": 4, "N": 8, "trials": 12, "seed": 11}"#);
    let out_dir = tmp.path().join("out");
    assert!(run_cli(&config, &out_dir).status.success());
    let csv_a = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    let json_a = fs::read(out_dir.join("summary.json")).unwrap();
    let threaded = bin()
        .env("SI_SUBNYQ_THREADS", "1")
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(threaded.status.success());

    assert_eq!(csv_a.lines().next(), Some(TRIALS_HEADER));
    assert_eq!(csv_a, fs::read_to_string(out_dir.join("trials.csv")).unwrap());
    assert_eq!(json_a, fs::read(out_dir.join("summary.json")).unwrap());

    let table = rows(&csv_a);
    assert_eq!(table.len(), 12);
    for (t, row) in table.iter().enumerate() {
        assert_eq!(row[0], t.to_string());
        assert_eq!(row[1], si_subnyq_cli::trial_seed(11, t).to_string());
        for idx in row[2].split(';') {
            let i: usize = idx.parse().unwrap();
            assert!((1..=6).contains(&i), "supports are 1-based");
        }
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), r#"{"trials": 3, "N": 4, "seed": 1}"#);
    let out = bin()
        .args(["run", "--seed", "99", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = rows(&fs::read_to_string(tmp.path().join("trials.csv")).unwrap());
    assert_eq!(table[2][1], si_subnyq_cli::trial_seed(99, 2).to_string());
}

#[test]
fn single_value_sweep_matches_run() {
    let cfg = ExperimentConfig::from_json(r#"{"m": 6, "k": 2, "p": 5, "N": 8, "trials": 6, "seed": 4}"#).unwrap();
    let swept = sweep_runs(&cfg, SweepVar::P, &[5]).unwrap();
    let direct = run_trials(&cfg).unwrap();
    assert_eq!(swept.points.len(), 1);
    assert_eq!(swept.points[0].summary, direct.summary);
}

#[test]
fn sweep_reports_collisions_below_twice_k() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"m": 6, "k": 2, "p": 2, "N": 8, "trials": 10, "seed": 5, "min_spark": 2}"#,
    );
    let out = bin()
        .args(["sweep", "--var", "p", "--values", "2,3,4,5,6", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&fs::read_to_string(tmp.path().join("sweep_p.csv")).unwrap());
    assert_eq!(table.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["2", "3", "4", "5", "6"]);
    let rate = |i: usize| table[i][1].parse::<f64>().unwrap();
    assert!(rate(0) < 1.0, "two measurements cannot identify two of six channels");
    let collisions: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sweep_p_collisions.json")).unwrap()).unwrap();
    assert!(!collisions.is_empty());
    assert!(collisions.iter().all(|c| c["value"].as_u64().unwrap() < 4), "{collisions:?}");
}

#[test]
fn sweep_rejects_unsupported_variable() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), r#"{"trials": 1}"#);
    let out = bin()
        .args(["sweep", "--var", "q", "--values", "1", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_covers_every_module() {
    let out = bin().args(["verify", "--json"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 12);
    assert_eq!(checks.len(), check_names().len());
    for group in ["si_core.", "sparse_model.", "sampling_design.", "ctf.", "scenarios."] {
        assert!(checks.iter().any(|c| c["name"].as_str().unwrap().starts_with(group)), "{group}");
    }
}

#[test]
fn tampered_verify_names_the_failed_invariant() {
    let out = bin().args(["verify", "--tamper-singular-w"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].starts_with("FAIL sampling_design.W_invertible"));
}

#[test]
fn invalid_config_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for bad in [
        r#"{"m": 4, "p": 5}"#,
        r#"{"trials": 0}"#,
        r#"{"bogus_field": 1}"#,
        r#"{"mode": "multiband"}"#,
        "not json",
    ] {
        let config = write_config(tmp.path(), bad);
        let out = run_cli(&config, tmp.path());
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!out.stderr.is_empty());
    }
    let missing = run_cli(&tmp.path().join("absent.json"), tmp.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unwritable_output_fails_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let config = write_config(tmp.path(), r#"{"trials": 1, "N": 4}"#);
    let out = run_cli(&config, &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sub"));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), r#"{"trials": 1, "N": 4}"#);
    let out = bin()
        .env("SI_SUBNYQ_THREADS", "many")
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_modes_run_end_to_end() {
    let periodic = ExperimentConfig::from_json(
        r#"{"mode": "periodic_sparsity", "trials": 3,
            "periodic_sparsity": {"m": 7, "k": 2, "s_pattern": [1, 4], "t_prime": 0.5, "n_blocks": 8, "p": 4}}"#,
    )
    .unwrap();
    let out = run_trials(&periodic).unwrap();
    assert_eq!(out.summary.success_rate, 1.0);
    assert!(out.records.iter().all(|r| r.support_true.is_subset(&[1, 4].into())));

    let multiband = ExperimentConfig::from_json(
        r#"{"mode": "multiband", "trials": 3,
            "multiband": {"n_bands": 1, "b": 1.0, "m": 7, "t": 0.5, "coset_offsets": [0, 1, 3, 5], "n": 16}}"#,
    )
    .unwrap();
    assert_eq!(run_trials(&multiband).unwrap().summary.success_rate, 1.0);
}

#[test]
fn shipped_configs_load_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let mut cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        cfg.trials = 2;
        assert_eq!(run_trials(&cfg).unwrap().summary.success_rate, 1.0, "{}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 3);
}
