//! `dqc`: datasets, state preparation, classifier training and evaluation,
//! and full-versus-effective validation for the dissipative central-spin model.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 numerical
//! failure, 3 the run completed but missed its threshold.

mod artifact;
mod commands;
mod config;
mod error;
mod svg;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dqc_core::exec::Parallelism;

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(name = "dqc", version, about = "Dissipative central-spin state preparation and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `training.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for gradient probes and scoring; 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Also write SVG plots next to the CSVs.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write train.csv and valid.csv for the configured boundary.
    Datagen,
    /// Train couplings and mode angles towards the target state.
    Prepare,
    /// Train a two-feature classifier and evaluate it on the validation set.
    Train,
    /// Score a saved model on the validation set.
    Eval,
    /// Compare full and effective steady states over the configured rates.
    Validate,
}

fn context(cli: &Cli) -> Result<Context> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.threads == 0 {
        return Err(CliError::Config("--threads must be ≥ 1".into()));
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let parallelism = if cli.threads > 1 && cfg!(feature = "parallel") {
        Parallelism::Rayon
    } else {
        Parallelism::Sequential
    };
    Ok(Context { seed: cli.seed.unwrap_or(cfg.training.seed), cfg, out, parallelism, svg: cli.svg })
}

fn dispatch(command: Command, ctx: &Context) -> Result<()> {
    match command {
        Command::Datagen => commands::datagen(ctx),
        Command::Prepare => commands::prepare(ctx),
        Command::Train => commands::train(ctx),
        Command::Eval => commands::eval(ctx),
        Command::Validate => commands::validate(ctx),
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(threads: usize, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    if threads <= 1 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(threads: usize, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    if threads > 1 {
        eprintln!("warning: built without the `parallel` feature; running sequentially");
    }
    f()
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = context(cli)?;
    run_with_threads(cli.threads, || dispatch(cli.command, &ctx))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
