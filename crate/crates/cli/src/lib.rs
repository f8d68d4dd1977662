// SPDX-License-Identifier: Apache-2.0
//! `aieda`: signal generation, MFCC extraction, fixed-vs-float comparison,
//! design-space exploration and flow runs.
//!
//! Exit codes: 0 success, 1 criteria unmet or a stage failed, 2 bad input
//! or configuration (including usage errors).

mod dse;
mod flow;
mod gen;
mod mfcc;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "aieda",
    version,
    about = "Keyword-spotting front-end modeling and design-flow driver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test signal as a 16-bit PCM mono WAV.
    Gen(gen::GenArgs),
    /// Compute MFCC frames of a WAV file.
    Mfcc(mfcc::MfccArgs),
    /// Compare fixed-point against floating-point results stage by stage.
    Compare(mfcc::CompareArgs),
    /// Run the design-space exploration and write its report.
    Dse(dse::DseArgs),
    /// Run or resume a design flow.
    #[command(subcommand)]
    Flow(flow::FlowCommand),
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, files or configuration.
    #[error("{0}")]
    Input(String),
    /// The run completed but its criteria were not met.
    #[error("{0}")]
    Unmet(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unmet(_) => 1,
        }
    }
}

pub(crate) fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub(crate) fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // the reader went away (`| head`); nothing is left to report
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(input),
            }
        }
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(
    path: &PathBuf,
    what: &str,
) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{what} {}: {e}", path.display())))
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Mfcc(a) => mfcc::run_mfcc(a),
        Command::Compare(a) => mfcc::run_compare(a),
        Command::Dse(a) => dse::run(a),
        Command::Flow(c) => flow::run(c),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        // usage errors exit with 2, --help and --version with 0
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aieda: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Unmet("x".into()).exit_code(), 1);
    }
}
