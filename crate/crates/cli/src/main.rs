//! `smdpde` command-line tool: robust location and scatter estimation,
//! efficiency and influence diagnostics, Monte-Carlo scenarios.

mod diagnose;
mod error;
mod estimate;
mod input;
mod simulate;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "smdpde", version, about = "Sequential minimum density power divergence estimation")]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate location and scatter from a CSV file
    Estimate(estimate::EstimateArgs),
    /// Run a Monte-Carlo scenario from a TOML file
    Simulate(simulate::SimulateArgs),
    /// Analytic diagnostics
    #[command(subcommand)]
    Diagnose(diagnose::DiagnoseCommand),
}

pub(crate) fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::validation(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::validation(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Estimate(a) => estimate::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Diagnose(d) => diagnose::run(d),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
