//! Command-line front end for `precipice`: metrics with interval estimates,
//! pairwise comparisons, performance profiles, rank distributions and
//! harness experiments, written as JSON, CSV and SVG.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;
pub mod svg;

use args::{Cli, Command};
use error::{CliError, CliResult};
use std::io::Write;

/// Runs one parsed invocation, writing stdout output to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    configure_threads(cli.threads)?;
    let (art, output) = match &cli.command {
        Command::Metrics(a) => (commands::metrics(a)?, &a.output),
        Command::Compare(a) => (commands::compare(a)?, &a.output),
        Command::Profile(a) => (commands::profile_cmd(a)?, &a.output),
        Command::Ranks(a) => (commands::ranks(a)?, &a.output),
        Command::Validate(a) => (commands::validate(a)?, &a.output),
    };
    commands::emit(&art, output, stdout)?;
    Ok(())
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}"))),
        None => Ok(()),
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        _ => Ok(()),
    }
}
