//! Batch driver for the laboratory: exact finite-space suites, reproducible
//! Monte Carlo simulation with on-disk ensembles, information-leak
//! diagnostics over recorded paths, and strong convergence benches.

mod bench;
mod config;
mod diagnose;
mod ensemble_io;
mod exact;
mod report;
mod simulate;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{load, OutputFormat, Overrides};

/// Terminal failures: a bad invocation or unreadable input exits 2, a run
/// that completes but reaches a negative verdict exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(err: impl fmt::Display) -> Self {
        CliError::Usage(format!("io: {err}"))
    }

    pub fn check(err: impl fmt::Display) -> Self {
        CliError::Check(err.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "problab", version, disable_help_subcommand = true)]
#[command(about = "exact and Monte Carlo probability laboratory")]
struct Cli {
    /// Run configuration file (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the configured seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured Monte Carlo path count
    #[arg(long, global = true)]
    paths: Option<usize>,

    /// Override the configured step count
    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Output directory (flag beats config beats PROBLAB_OUT_DIR)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// csv writes tables next to the JSON report, json skips them
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact finite-space suite
    Exact,
    /// Simulate the configured model and record its paths
    Simulate,
    /// Test recorded ensembles for information leaks
    Diagnose,
    /// Measure strong convergence or copy agreement
    Bench,
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config FILE is required"))?;
    let overrides = Overrides {
        seed: cli.seed,
        paths: cli.paths,
        steps: cli.steps,
        out: cli.out.clone(),
        format: cli.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
    };
    let resolved = load(config_path, &overrides)?;
    match cli.command {
        Command::Exact => exact::run(&resolved),
        Command::Simulate => simulate::run(&resolved),
        Command::Diagnose => diagnose::run(&resolved),
        Command::Bench => bench::run(&resolved),
    }
}

fn main() -> ExitCode {
    match dispatch(&Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
