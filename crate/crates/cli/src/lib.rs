//! Command-line harness around the `ppcg` solvers: single runs, head-to-head
//! comparisons and convergence plots.

pub mod args;
pub mod commands;
pub mod plot;
pub mod problem;
pub mod trace;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::EXIT_ERROR;

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| dispatch(&cli.command))),
        None => dispatch(&cli.command),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: &Command) -> anyhow::Result<i32> {
    match command {
        Command::Solve(a) => commands::solve(a),
        Command::Compare(a) => commands::compare(a),
        Command::Plot(a) => commands::plot(a),
    }
}
