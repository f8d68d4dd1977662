// SPDX-License-Identifier: Apache-2.0
//! External EDA tool adapters.
//!
//! Each adapter runs one external binary at a time (Icarus Verilog, Yosys,
//! OpenSTA) under a hard timeout and reduces its output to a [`ToolReport`].
//! Report parsers are total over arbitrary bytes. [`MockAdapter`] replays
//! recorded reports so feedback loops can be tested without any tools.

pub mod adapters;
pub mod fixtures;
mod mock;
mod parse;
pub mod process;
mod report;

pub use adapters::{
    declared_modules, run_command, Simulator, Synthesizer, TimingAnalyzer, ToolPaths, SCRATCH_DIR,
};
pub use mock::MockAdapter;
pub use parse::{parse_simulation, parse_sta, parse_synthesis};
pub use report::{ToolReport, ToolStatus};

use std::path::PathBuf;

use thiserror::Error;

/// Set to `1` to run tests against installed tools.
pub const REAL_TOOLS_ENV: &str = "AIEDA_ENABLE_REAL_TOOLS";

pub fn real_tools_enabled() -> bool {
    std::env::var(REAL_TOOLS_ENV).is_ok_and(|v| v == "1")
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error("invalid tool report: {0}")]
    InvalidReport(String),
    #[error("malformed scenario: {0}")]
    Scenario(String),
    #[error("scenario of {len} reports is exhausted")]
    ScenarioExhausted { len: usize },
    #[error("empty command line")]
    EmptyCommand,
}
