// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::Args;

use kws_core::dse::{run_dse, Corpus, DseConfig, DseError, DseReport};

use crate::{emit, input, read_json, CliError};

#[derive(Debug, Args)]
pub struct DseArgs {
    /// Directory of WAV clips; the bundled corpus when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Exploration settings JSON; defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for candidate evaluation. Results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_report(out: Option<&std::path::Path>, report: &DseReport) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    emit(out, &text)
}

pub fn run(a: DseArgs) -> Result<(), CliError> {
    let corpus = match &a.corpus {
        Some(dir) => {
            Corpus::load_dir(dir).map_err(|e| input(format!("corpus {}: {e}", dir.display())))?
        }
        None => Corpus::bundled(),
    };
    let mut cfg: DseConfig = match &a.config {
        Some(p) => read_json(p, "DSE config")?,
        None => DseConfig::default(),
    };
    cfg.jobs = a.jobs as usize;
    match run_dse(&corpus, &cfg) {
        Ok(report) => write_report(a.out.as_deref(), &report),
        // a decision with no feasible candidate still yields the partial report
        Err(DseError::Aborted { source, report }) => {
            write_report(a.out.as_deref(), &report)?;
            Err(CliError::Unmet(source.to_string()))
        }
        Err(e) => Err(input(e)),
    }
}
