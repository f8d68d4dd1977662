// SPDX-License-Identifier: Apache-2.0
//! Serializable orchestrator state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use kws_toolchain::ToolStatus;

use crate::{sha256_json, Proposal, VerdictKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStage {
    Architecture,
    Rtl,
    Synthesis,
    Physical,
}

impl FlowStage {
    /// Execution order.
    pub const ALL: [FlowStage; 4] = [
        FlowStage::Architecture,
        FlowStage::Rtl,
        FlowStage::Synthesis,
        FlowStage::Physical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FlowStage::Architecture => "architecture",
            FlowStage::Rtl => "rtl",
            FlowStage::Synthesis => "synthesis",
            FlowStage::Physical => "physical",
        }
    }

    /// What the stage's reasoner is asked to achieve.
    pub fn goal(self) -> &'static str {
        match self {
            FlowStage::Architecture => {
                "Choose front-end parameters (bandwidth, bit width, pre-emphasis, window, FFT size, mel shape) \
                 by design-space exploration; parameters override exploration settings."
            }
            FlowStage::Rtl => {
                "Write synthesizable Verilog and a self-checking testbench (*_tb.v) that prints TEST PASS; \
                 revise until simulation passes."
            }
            FlowStage::Synthesis => {
                "Synthesize the RTL and meet timing: zero failures and worst slack >= 0 ns. \
                 Constraints may be supplied as an .sdc artifact."
            }
            FlowStage::Physical => "Run the configured physical-design command to completion.",
        }
    }
}

impl std::fmt::Display for FlowStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pending,
    Running,
    Passed,
    Failed,
    Skipped,
}

/// One tool invocation and the verdict on it. Append-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub stage: FlowStage,
    /// Contiguous from 0 within a stage.
    pub iteration: u32,
    pub proposal_digest: String,
    pub report_digest: String,
    pub report_status: ToolStatus,
    pub verdict: VerdictKind,
    /// Tool run plus reflection; excluded from [`crate::FlowResult`].
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageState {
    pub status: StageStatus,
    pub budget: u32,
    /// Tool invocations so far; never exceeds `budget`.
    pub iterations: u32,
    /// Proposal to apply on the next iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<Proposal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StageState {
    pub fn new(budget: u32) -> Self {
        StageState {
            status: StageStatus::Pending,
            budget,
            iterations: 0,
            pending: None,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowState {
    /// `None` once every configured stage has a final status.
    pub current: Option<FlowStage>,
    /// Configured stages only.
    pub stages: BTreeMap<FlowStage, StageState>,
    /// Workspace-relative path → content digest of the latest write.
    pub artifacts: BTreeMap<String, String>,
    /// Content store keyed by digest.
    pub objects: BTreeMap<String, String>,
    /// Accepted parameter assignments, per stage.
    pub parameters: BTreeMap<FlowStage, BTreeMap<String, Value>>,
    pub history: Vec<ActionRecord>,
}

impl FlowState {
    /// Fresh state with the given stages (in any order) and budgets.
    pub fn new(stages: impl IntoIterator<Item = (FlowStage, u32)>) -> Self {
        let stages: BTreeMap<FlowStage, StageState> = stages
            .into_iter()
            .map(|(s, b)| (s, StageState::new(b)))
            .collect();
        FlowState {
            current: stages.keys().next().copied(),
            stages,
            artifacts: BTreeMap::new(),
            objects: BTreeMap::new(),
            parameters: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    pub fn stage(&self, stage: FlowStage) -> Option<&StageState> {
        self.stages.get(&stage)
    }

    pub fn is_finished(&self) -> bool {
        self.current.is_none()
    }

    /// Tool invocations recorded for `stage`.
    pub fn invocations(&self, stage: FlowStage) -> usize {
        self.history.iter().filter(|r| r.stage == stage).count()
    }

    /// Content of an artifact, from the store.
    pub fn artifact(&self, path: &str) -> Option<&str> {
        self.artifacts
            .get(path)
            .and_then(|d| self.objects.get(d))
            .map(String::as_str)
    }

    /// Stores `content` and points `path` at it; returns the digest.
    pub(crate) fn put_artifact(&mut self, path: &str, content: &str) -> String {
        let digest = content_digest(content);
        self.objects
            .entry(digest.clone())
            .or_insert_with(|| content.to_string());
        self.artifacts.insert(path.to_string(), digest.clone());
        digest
    }

    /// The next configured stage after `stage`.
    pub(crate) fn after(&self, stage: FlowStage) -> Option<FlowStage> {
        self.stages.keys().copied().find(|&s| s > stage)
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn digest(&self) -> String {
        sha256_json(self)
    }
}

pub(crate) fn content_digest(content: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(content.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_order_and_names() {
        let mut sorted = FlowStage::ALL;
        sorted.sort();
        assert_eq!(sorted, FlowStage::ALL);
        assert_eq!(serde_json::to_string(&FlowStage::Rtl).unwrap(), "\"rtl\"");
    }

    #[test]
    fn state_round_trips_with_stage_keys() {
        let mut s = FlowState::new([(FlowStage::Synthesis, 2), (FlowStage::Rtl, 3)]);
        assert_eq!(s.current, Some(FlowStage::Rtl));
        assert_eq!(s.after(FlowStage::Rtl), Some(FlowStage::Synthesis));
        assert_eq!(s.after(FlowStage::Synthesis), None);
        s.put_artifact("a.v", "module a; endmodule\n");
        let json = serde_json::to_string(&s).unwrap();
        let back: FlowState = serde_json::from_str(&json).unwrap();
        assert_eq!(back.digest(), s.digest());
        assert_eq!(back.artifact("a.v"), Some("module a; endmodule\n"));
    }

    #[test]
    fn identical_content_is_stored_once() {
        let mut s = FlowState::new([(FlowStage::Rtl, 1)]);
        let a = s.put_artifact("x.v", "same");
        let b = s.put_artifact("y.v", "same");
        assert_eq!(a, b);
        assert_eq!(s.objects.len(), 1);
    }
}
