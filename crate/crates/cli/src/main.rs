//! `gapq`: build question-augmented pretraining data, extract control
//! plans, and score summaries.
//!
//! Exit codes: 0 success, 1 usage, configuration or I/O error, 2 build
//! aborted because too many documents were skipped.

mod analyze;
mod build;
mod config;
mod io;
mod plans;
mod rouge;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;

#[derive(Debug, Parser)]
#[command(
    name = "gapq",
    version,
    about = "Question-augmented pretraining data and control plans"
)]
struct Cli {
    /// Log level: off, error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn", value_name = "LEVEL")]
    log_level: LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Build(build::BuildArgs),
    Plans(plans::PlansArgs),
    Analyze(analyze::AnalyzeArgs),
    Rouge(rouge::RougeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Build(args) => build::run(args),
        Command::Plans(args) => plans::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Rouge(args) => rouge::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
