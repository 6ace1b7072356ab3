//! `qcomp`: command-line front end for the compression, side-information,
//! correlated-sampling and one-way experiments.
//!
//! Exit codes: 0 success, 1 property violation under `selfcheck`,
//! 2 usage error, 3 module or i/o error.

mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn init_threads() -> Result<(), CliError> {
    let Some(v) = std::env::var_os("QC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .to_str()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("QC_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (outcome, common) = match &cli.command {
        Command::Quantities(c) => (commands::quantities(c)?, c),
        Command::Substate(c) => (commands::substate(c)?, c),
        Command::Compress(a) => (commands::compress(a)?, &a.common),
        Command::Sideinfo(c) => (commands::sideinfo(c)?, c),
        Command::Corrsample(a) => (commands::corrsample(a)?, &a.common),
        Command::Oneway(a) => (commands::oneway_cmd(a)?, &a.common),
        Command::Sweep(a) => (commands::sweep(a)?, &a.common),
        Command::Selfcheck(a) => (commands::selfcheck(a)?, &a.common),
    };
    commands::emit(&outcome, common)?;
    Ok(outcome.violation)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // clap prints usage and picks 2 for errors, 0 for --help/--version
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("selfcheck: property violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qcomp: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `qcomp --help` for usage");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
