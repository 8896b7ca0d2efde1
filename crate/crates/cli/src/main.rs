use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use si_subnyq_cli::config::parse_values;
use si_subnyq_cli::{run, sweep, verify, CliError, ExperimentConfig, SweepVar, Tamper};

#[derive(Parser)]
#[command(name = "si-subnyq", version, about = "Compressive sampling of sparse shift-invariant signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat a run for each value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of p, k, N.
        #[arg(long)]
        var: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the fixed-seed invariant suite.
    Verify {
        #[arg(long)]
        json: bool,
        /// Make W singular at one grid point; the suite must then fail.
        #[arg(long, hide = true)]
        tamper_singular_w: bool,
    },
}

// A closed stdout (e.g. piped into `head`) is not an error worth a panic.
macro_rules! say {
    ($($arg:tt)*) => {
        let _ = writeln!(std::io::stdout(), $($arg)*);
    };
}

fn load(config: &Path, out_dir: Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(dir) = out_dir {
        cfg.output.dir = dir;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, out_dir, seed } => {
            let mut cfg = load(&config, out_dir)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (out, csv, json) = run(&cfg)?;
            say!(
                "{} trials, success rate {}, median nmse {:e}",
                out.summary.trials, out.summary.success_rate, out.summary.median_nmse
            );
            say!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Command::Sweep { config, var, values, out_dir } => {
            let cfg = load(&config, out_dir)?;
            let var: SweepVar = var.parse()?;
            let (out, csv, json) = sweep(&cfg, var, &parse_values(&values)?)?;
            for p in &out.points {
                say!("{} = {}: success rate {}", var.name(), p.value, p.summary.success_rate);
            }
            say!("{} collisions; wrote {} and {}", out.collisions.len(), csv.display(), json.display());
            Ok(true)
        }
        Command::Verify { json, tamper_singular_w } => {
            let report = verify(Tamper { singular_w: tamper_singular_w });
            if json {
                say!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let _ = write!(std::io::stdout(), "{}", report.render());
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
