// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Subcommand};

use kws_flow::{FlowConfig, FlowError, FlowResult, FlowRunner, OverallStatus, StepOutcome};

use crate::{emit, input, CliError};

#[derive(Debug, Subcommand)]
pub enum FlowCommand {
    /// Start a flow from its configuration.
    Run(FlowArgs),
    /// Continue a flow from a checkpoint taken under the same configuration.
    Resume(FlowArgs),
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Saved after every tool invocation; required for resume.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Result JSON; stdout when absent.
    #[arg(long)]
    pub result: Option<PathBuf>,
}

fn flow_error(e: FlowError) -> CliError {
    match e {
        FlowError::Io(_) => CliError::Unmet(e.to_string()),
        e => input(e),
    }
}

fn drive(mut runner: FlowRunner, args: &FlowArgs) -> Result<FlowResult, CliError> {
    loop {
        let seen = runner.state().history.len();
        let outcome = runner.step().map_err(flow_error)?;
        if let Some(cp) = &args.checkpoint {
            runner.save_checkpoint(cp).map_err(flow_error)?;
        }
        for r in &runner.state().history[seen..] {
            eprintln!(
                "{} iteration {}: {} -> {:?}",
                r.stage, r.iteration, r.report_status, r.verdict
            );
        }
        if outcome == StepOutcome::Finished {
            return Ok(FlowResult::from_state(runner.state()));
        }
    }
}

pub fn run(cmd: FlowCommand) -> Result<(), CliError> {
    let (args, resume) = match cmd {
        FlowCommand::Run(a) => (a, false),
        FlowCommand::Resume(a) => (a, true),
    };
    let config = FlowConfig::load(&args.config).map_err(flow_error)?;
    let runner = if resume {
        let cp = args
            .checkpoint
            .as_ref()
            .ok_or_else(|| input("flow resume needs --checkpoint"))?;
        if !cp.is_file() {
            return Err(input(format!("checkpoint {} does not exist", cp.display())));
        }
        FlowRunner::resume(config, cp)
    } else {
        FlowRunner::new(config)
    }
    .map_err(flow_error)?;
    let result = drive(runner, &args)?;
    emit(args.result.as_deref(), &format!("{}\n", result.to_json()))?;
    match result.status {
        OverallStatus::Success | OverallStatus::Partial => Ok(()),
        OverallStatus::Failed => {
            let failed: Vec<String> = result
                .stages
                .iter()
                .filter(|s| s.status == kws_flow::StageStatus::Failed)
                .map(|s| format!("{} ({})", s.stage, s.note.as_deref().unwrap_or("failed")))
                .collect();
            Err(CliError::Unmet(format!(
                "stage failed: {}",
                failed.join(", ")
            )))
        }
    }
}
