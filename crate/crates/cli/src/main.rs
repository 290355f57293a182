use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cch_cli::commands::{self, FitOptions, OracleOptions};
use cch_cli::config::{ExperimentConfig, InitialData};
use cch_cli::inequalities::{self, SuiteOptions};
use cch_cli::{CliError, Result};
use cch_core::GaussianData;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cch", version, about = "Convective Cahn-Hilliard experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write CSV, JSON summary and checkpoints.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override `initial.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Continue a run from a checkpoint file.
    Resume {
        checkpoint: PathBuf,
        /// Defaults to the checkpoint's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit a power law to one column of a diagnostics CSV.
    Fit {
        csv: PathBuf,
        /// Column name; defaults to `dk_<level>`.
        #[arg(long)]
        column: Option<String>,
        /// Derivative order.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// `t_lo,t_hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        /// `L^p` class of the data, for the predicted exponent.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        allow_extension: bool,
    },
    /// Run the seeded inequality suites.
    CheckInequalities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        fields: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the continuum linear decay oracle for Gaussian data.
    Oracle {
        /// Take amplitude, width and dimension from a gaussian config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Highest derivative order.
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, value_parser = parse_window, default_value = "100,10000")]
        window: (f64, f64),
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Picard fixed-point solve on the configured short horizon.
    LocalSolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected t_lo,t_hi")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad t_lo {lo}"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad t_hi {hi}"))?;
    Ok((lo, hi))
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.set_seed(seed)?;
    }
    Ok(cfg)
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    // a closed pipe downstream is not an error of the run
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, seed, common } => {
            let cfg = load(&config, seed)?;
            print(&commands::run(&cfg, &common.out_dir)?.summary)
        }
        Command::Resume { checkpoint, out_dir } => {
            print(&commands::resume(&checkpoint, out_dir.as_deref())?.summary)
        }
        Command::Fit { csv, column, level, window, p, dim, allow_extension } => {
            let opts = FitOptions { column, level, window, p, dim, allow_extension };
            print(&commands::fit(&csv, &opts)?)
        }
        Command::CheckInequalities { seed, fields, common } => {
            let report = inequalities::check_all(&SuiteOptions { base_seed: seed, fields, ..Default::default() })?;
            std::fs::create_dir_all(&common.out_dir)?;
            let text = serde_json::to_string_pretty(&report)?;
            std::fs::write(common.out_dir.join("inequalities.json"), &text)?;
            let _ = writeln!(std::io::stdout(), "{text}");
            match report.failures() {
                0 => Ok(()),
                failed => Err(CliError::InequalityFailed { failed }),
            }
        }
        Command::Oracle { config, level, window, points, p, common } => {
            let mut opts = OracleOptions { max_k: level, window, points, p, ..Default::default() };
            if let Some(path) = config {
                let cfg = ExperimentConfig::load(&path)?;
                match cfg.initial {
                    InitialData::Gaussian { amplitude, width, .. } => {
                        opts.data = GaussianData { amplitude, width, dim: cfg.grid.dim };
                    }
                    _ => return Err(CliError::Config("oracle needs initial.kind = gaussian".into())),
                }
            }
            std::fs::create_dir_all(&common.out_dir)?;
            print(&commands::oracle(&opts, Some(&common.out_dir.join("oracle.csv")))?)
        }
        Command::LocalSolve { config, seed } => print(&commands::local_solve(&load(&config, seed)?)?),
    }
}

fn init_threads() {
    if let Some(threads) = std::env::var("CCH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("CCH_THREADS ignored: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({
                "error": { "category": e.category(), "message": e.to_string() }
            });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
