//! Command-line front end for the `pqcm-core` simulations.
//!
//! Exit codes: 0 on success or a feasible verdict, 2 when the requested
//! cloner does not exist, 1 for every other error.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod states;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{Cli, Command};
pub use config::{Format, RunConfig};
pub use error::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PQCM_THREADS";

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Output goes to stdout, diagnostics to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_cap().and_then(|cap| match cap {
        None => commands::execute(&cli),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| commands::execute(&cli)),
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
