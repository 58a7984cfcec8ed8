//! `patchfront`: eigenvalues, speed predictions, simulations, certification
//! checks and patch-shape optimization from the command line.
//!
//! Exit codes: `0` success, `1` invalid input, `2` runtime failure.

mod args;
mod commands;
mod config;
mod failure;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::eigen::EigenArgs;
use commands::optimize::OptimizeArgs;
use commands::predict::PredictArgs;
use commands::simulate::SimulateArgs;
use commands::verify::VerifyMode;
use commands::Report;
use failure::{Failure, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "patchfront",
    version,
    about = "Fronts of Fisher-KPP equations driven by a moving favorable patch"
)]
struct Cli {
    /// Directory receiving the fixed-name outputs and manifest.json.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Concurrent runs in sweeps and searches; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Command {
    /// Principal eigenvalue of the patch-frame operator.
    Eigen(EigenArgs),
    /// Predicted spreading speed.
    Predict(PredictArgs),
    /// Simulates a scenario file.
    Simulate(SimulateArgs),
    /// Scenario checks.
    Verify {
        #[command(subcommand)]
        mode: VerifyMode,
    },
    /// Bang-bang optimization of the patch shape.
    Optimize(OptimizeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigen(_) => "eigen",
            Command::Predict(_) => "predict",
            Command::Simulate(_) => "simulate",
            Command::Verify { mode } => match mode {
                VerifyMode::Sweep(_) => "verify sweep",
                VerifyMode::Corollary(_) => "verify corollary",
                VerifyMode::Oscillate(_) => "verify oscillate",
                VerifyMode::Supersub(_) => "verify supersub",
                VerifyMode::Interface(_) => "verify interface",
            },
            Command::Optimize(_) => "optimize",
        }
    }
}

fn execute(cli: &Cli) -> Outcome {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(Failure::runtime)?;
    let out_dir = cli.out_dir.as_deref();
    let Report {
        stdout,
        artifacts,
        resolved,
    } = match &cli.command {
        Command::Eigen(a) => commands::eigen::run(a)?,
        Command::Predict(a) => commands::predict::run(a)?,
        Command::Simulate(a) => commands::simulate::run(a, out_dir)?,
        Command::Verify { mode } => commands::verify::run(mode)?,
        Command::Optimize(a) => commands::optimize::run(a)?,
    };
    let mut config = serde_json::to_value(&cli.command).map_err(Failure::runtime)?;
    if let (Some(map), Some(resolved)) = (config.as_object_mut(), resolved) {
        map.insert("resolved".to_owned(), resolved);
    }
    artifacts.write(out_dir, cli.command.name(), config)?;
    std::io::stdout()
        .write_all(&stdout)
        .map_err(Failure::runtime)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
