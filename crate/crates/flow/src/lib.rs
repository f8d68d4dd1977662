// SPDX-License-Identifier: Apache-2.0
//! The design-flow loop: Architecture, Rtl, Synthesis and Physical stages,
//! each driven by propose → apply → run tool → reflect until the reasoner
//! accepts, aborts or the stage budget runs out.
//!
//! Reasoners are pluggable ([`ScriptedReasoner`] for hermetic runs,
//! [`RemoteReasoner`] for a chat-completion endpoint). The state is fully
//! serializable; a checkpoint taken at any iteration boundary resumes to the
//! same [`FlowResult`] as an uninterrupted run.

mod checkpoint;
mod config;
mod engine;
mod proposal;
mod reasoner;
mod remote;
mod state;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_SCHEMA};
pub use config::{
    AdapterConfig, ArchitectureConfig, FlowConfig, PhysicalConfig, ReasonerConfig, ReasonerKind,
    RtlConfig, StagesConfig, SynthesisConfig,
};
pub use engine::{
    run_flow, FlowResult, FlowRunner, HistoryEntry, OverallStatus, StageOutcome, StepOutcome,
};
pub use proposal::{safe_relative_path, Proposal, Verdict, VerdictKind};
pub use reasoner::{Reasoner, ScriptTable, ScriptedReasoner, StageContext, HISTORY_WINDOW};
pub use remote::{extract_fenced_block, RemoteReasoner, API_KEY_ENV};
pub use state::{ActionRecord, FlowStage, FlowState, StageState, StageStatus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    ConfigInvalid(String),
    #[error("script has no step {iteration} for stage {stage}")]
    ScriptExhausted { stage: FlowStage, iteration: u32 },
    #[error("remote reasoner protocol error: {0}")]
    RemoteProtocol(String),
    #[error("reasoner output violates the schema: {0}")]
    SchemaViolation(String),
    #[error("path {0:?} escapes the workspace")]
    PathTraversal(String),
    #[error("checkpoint was taken under config {found}, current config is {expected}")]
    ConfigMismatch { expected: String, found: String },
    #[error("corrupt checkpoint: {0}")]
    CheckpointCorrupt(String),
    #[error("tool adapter: {0}")]
    Tool(#[from] kws_toolchain::ToolError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl FlowError {
    /// Reasoner faults end the stage as a recorded failure; everything else
    /// aborts the flow.
    pub fn is_reasoner_fault(&self) -> bool {
        matches!(
            self,
            FlowError::ScriptExhausted { .. }
                | FlowError::RemoteProtocol(_)
                | FlowError::SchemaViolation(_)
                | FlowError::PathTraversal(_)
        )
    }
}

pub(crate) fn sha256_json<T: serde::Serialize>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(value).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}
