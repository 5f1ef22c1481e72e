mod args;
mod commands;
mod error;
mod rule;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{expand_config, Cli, Command};
use crate::error::{usage, CliResult};

/// Caps the worker pool from `QMCFORGE_THREADS`; `0` or unset means automatic.
fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("QMCFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| usage(format!("QMCFORGE_THREADS = '{text}' is not a count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> CliResult<()> {
    configure_threads()?;
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            e.print().ok();
            std::process::exit(code);
        }
    };
    match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Certify(a) => commands::certify(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
