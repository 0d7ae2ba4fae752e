//! `curvestat`: predictions, trace sweeps, random-matrix experiments and
//! exhaustive censuses, emitted as JSON envelopes or CSV tables.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use output::{emit, Execution};

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let exec = |workers: usize| Execution {
        workers,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    match cli.command {
        Command::Predict(a) => {
            let (params, payload) = commands::predict(&a)?;
            emit(&a.output, "predict", params, &payload, commands::predict_table, exec(1))
        }
        Command::Series(a) => {
            let (params, payload) = commands::series(&a)?;
            emit(&a.output, "series", params, &payload, commands::series_table, exec(1))
        }
        Command::Trace(a) => {
            let (params, payload) = commands::trace(&a)?;
            emit(&a.output, "trace", params, &payload, commands::trace_table, exec(1))
        }
        Command::Rmt(a) => {
            let workers = a.workers.unwrap_or_else(default_workers);
            let (params, payload) = commands::rmt(&a, workers)?;
            emit(&a.output, "rmt", params, &payload, commands::rmt_table, exec(workers))
        }
        Command::Census(a) => {
            let workers = a.workers.unwrap_or_else(default_workers);
            let (params, payload) = commands::census(&a, workers)?;
            emit(&a.output, "census", params, &payload, commands::census_table, exec(workers))
        }
        Command::Report(a) => {
            let (params, payload) = commands::report(&a)?;
            emit(&a.output, "report", params, &payload, commands::report_table, exec(1))
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help / --version.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
