//! `spectral-eta`: batch runner for relative eta, zeta, spectral flow,
//! spectral shift and gluing experiments.

mod config;
mod error;
mod output;
mod pipelines;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use spectral_eta::verification::{run_all, SuiteOptions};

use config::ExperimentConfig;
use error::CliError;
use output::{results_csv, samples_csv, write_atomic, write_plots, Status};

const THREADS_ENV: &str = "SPECTRAL_ETA_THREADS";

#[derive(Parser)]
#[command(name = "spectral-eta", version, about = "Relative spectral invariants of lattice Dirac-type operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; SPECTRAL_ETA_THREADS takes precedence.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize an output directory and regenerate its plot data.
    Report { dir: PathBuf },
    /// Run the acceptance suite.
    VerifyAll {
        /// Smaller ensembles and grids.
        #[arg(long)]
        quick: bool,
    },
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn run(config: &Path, out: Option<PathBuf>, flag_threads: Option<usize>) -> Result<bool, CliError> {
    let threads = threads(flag_threads)?;
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
    let cfg = ExperimentConfig::parse(&text)?;
    spectral_eta::configure_threads(threads).map_err(|e| CliError::Config(e.to_string()))?;
    let dir = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let started = unix_seconds();
    let clock = Instant::now();
    let outcome = pipelines::run(&cfg)?;
    let elapsed = clock.elapsed().as_secs_f64();
    write_atomic(&dir, "results.csv", &results_csv(&outcome.rows)?)?;
    write_atomic(&dir, "samples.csv", &samples_csv(&outcome.samples)?)?;
    let plots = write_plots(&dir, &outcome.rows, &outcome.samples)?;
    let meta = serde_json::json!({
        "config": cfg,
        "pipeline": cfg.pipeline.name(),
        "versions": {
            "spectral-eta": env!("CARGO_PKG_VERSION"),
        },
        "threads": threads,
        "plots": plots,
        "started_unix": started,
        "finished_unix": unix_seconds(),
        "elapsed_seconds": elapsed,
    });
    let meta = serde_json::to_vec_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir, "meta.json", &meta)?;
    let failed: Vec<&str> = outcome
        .rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| r.quantity.as_str())
        .collect();
    for q in &failed {
        eprintln!("FAIL: {q}");
    }
    println!(
        "{}: {} rows, {} failed, written to {}",
        cfg.pipeline.name(),
        outcome.rows.len(),
        failed.len(),
        dir.display()
    );
    Ok(failed.is_empty())
}

fn verify_all(quick: bool) -> bool {
    let reports = run_all(SuiteOptions { quick });
    for r in &reports {
        println!("{}", r.line());
    }
    reports.iter().all(|r| r.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, threads } => run(&config, out, threads),
        Command::Report { dir } => report::report(&dir).map(|text| {
            print!("{text}");
            true
        }),
        Command::VerifyAll { quick } => Ok(verify_all(quick)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
