//! Command-line front end for `phonoprobe`.
//!
//! [`run`] parses arguments, runs exactly one subcommand inside a rayon pool
//! of the requested size, and maps any failure to a one-line diagnostic on
//! stderr plus a nonzero exit status.

pub mod args;
mod commands;
mod error;
pub mod output;
pub mod plot;
pub mod records;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::CONTOUR_THRESHOLDS;
pub use error::{CliError, Result};

use args::{Cli, Command};

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let rendered = e.to_string();
                    let line = rendered
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap_or("invalid arguments")
                        .trim_start_matches("error: ");
                    eprintln!("phonoprobe: {line}");
                    2
                }
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("phonoprobe: {msg}");
            e.exit_code()
        }
    }
}

/// Runs a parsed invocation inside a thread pool of `--workers` threads.
pub fn execute(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", cli.workers)))?;
    pool.install(|| match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Logmel(a) => commands::logmel(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Window(a) => commands::window(a),
        Command::Tg(a) => commands::tg(a),
        Command::Context(a) => commands::context(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Synth(a) => commands::synth(a),
        Command::Plot(a) => commands::plot(a),
    })
}
