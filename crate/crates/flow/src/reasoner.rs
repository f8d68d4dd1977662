// SPDX-License-Identifier: Apache-2.0
//! The reasoner contract and the table-driven implementation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use kws_toolchain::fixtures::{fifo_rtl, fifo_sdc, FifoRevision, FIFO_TB_V};
use kws_toolchain::ToolReport;

use crate::{ActionRecord, FlowError, FlowStage, Proposal, Verdict};

/// Records passed to a reasoner; older ones are dropped.
pub const HISTORY_WINDOW: usize = 4;

/// Everything a reasoner sees about the stage it works on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageContext {
    pub stage: FlowStage,
    pub goal: String,
    /// Index of the iteration being proposed, or just run when reflecting.
    pub iteration: u32,
    pub budget: u32,
    /// Workspace-relative path → content digest.
    pub artifacts: BTreeMap<String, String>,
    /// Parameters accepted so far for this stage.
    pub parameters: BTreeMap<String, Value>,
    /// At most [`HISTORY_WINDOW`] records, oldest first.
    pub history: Vec<ActionRecord>,
    /// Artifact contents, for reasoners that read them.
    #[serde(skip)]
    pub contents: BTreeMap<String, String>,
}

pub trait Reasoner {
    fn propose(&mut self, ctx: &StageContext) -> Result<Proposal, FlowError>;
    /// Must not accept a report whose status is not pass.
    fn reflect(&mut self, ctx: &StageContext, report: &ToolReport) -> Result<Verdict, FlowError>;
}

/// Proposals per stage, indexed by iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScriptTable(pub BTreeMap<FlowStage, Vec<Proposal>>);

impl ScriptTable {
    pub fn from_json(text: &str) -> Result<Self, FlowError> {
        let table: ScriptTable = serde_json::from_str(text)
            .map_err(|e| FlowError::ConfigInvalid(format!("script: {e}")))?;
        for p in table.0.values().flatten() {
            p.validate()?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, FlowError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FlowError::ConfigInvalid(format!("script {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn step(&self, stage: FlowStage, iteration: u32) -> Option<&Proposal> {
        self.0.get(&stage)?.get(iteration as usize)
    }

    /// The FIFO walkthrough: the first RTL draft fills one entry early, the
    /// first fix drops the underflow guard, the second fix is correct.
    pub fn builtin() -> Self {
        let mut t = BTreeMap::new();
        t.insert(
            FlowStage::Architecture,
            vec![Proposal {
                rationale: "Run the exploration with default criteria.".into(),
                ..Proposal::default()
            }],
        );
        let rtl = |rev: FifoRevision, with_tb: bool, why: &str| {
            let mut writes = BTreeMap::from([("fifo.v".to_string(), fifo_rtl(rev))]);
            if with_tb {
                writes.insert("fifo_tb.v".to_string(), FIFO_TB_V.to_string());
            }
            Proposal {
                writes,
                parameters: BTreeMap::new(),
                rationale: why.into(),
            }
        };
        t.insert(
            FlowStage::Rtl,
            vec![
                rtl(
                    FifoRevision::EarlyFull,
                    true,
                    "Initial 6-bit, 32-entry FIFO with its testbench.",
                ),
                rtl(
                    FifoRevision::NoUnderflowGuard,
                    false,
                    "Assert full only when all entries are occupied.",
                ),
                rtl(FifoRevision::Correct, false, "Block reads while empty."),
            ],
        );
        let sdc = |period: f64, why: &str| Proposal {
            writes: BTreeMap::from([("constraints.sdc".to_string(), fifo_sdc(period))]),
            parameters: BTreeMap::from([("clock_period_ns".to_string(), Value::from(period))]),
            rationale: why.into(),
        };
        t.insert(
            FlowStage::Synthesis,
            vec![
                sdc(10.0, "Constrain the clock to 100 MHz."),
                sdc(20.0, "Relax the clock to 50 MHz."),
            ],
        );
        ScriptTable(t)
    }
}

/// Deterministic reasoner: proposes table entries and revises with the next
/// entry until the table runs out.
#[derive(Debug, Clone)]
pub struct ScriptedReasoner {
    table: ScriptTable,
}

impl ScriptedReasoner {
    pub fn new(table: ScriptTable) -> Self {
        ScriptedReasoner { table }
    }
}

impl Reasoner for ScriptedReasoner {
    fn propose(&mut self, ctx: &StageContext) -> Result<Proposal, FlowError> {
        self.table
            .step(ctx.stage, ctx.iteration)
            .cloned()
            .ok_or(FlowError::ScriptExhausted {
                stage: ctx.stage,
                iteration: ctx.iteration,
            })
    }

    fn reflect(&mut self, ctx: &StageContext, report: &ToolReport) -> Result<Verdict, FlowError> {
        if report.is_pass() {
            return Ok(Verdict::Accept);
        }
        Ok(match self.table.step(ctx.stage, ctx.iteration + 1) {
            Some(next) if !next.is_empty() => Verdict::Revise {
                proposal: next.clone(),
            },
            _ => Verdict::Abort {
                reason: format!(
                    "no scripted fix after iteration {} ({})",
                    ctx.iteration,
                    report.summary()
                ),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kws_toolchain::ToolStatus;

    fn ctx(stage: FlowStage, iteration: u32) -> StageContext {
        StageContext {
            stage,
            goal: stage.goal().into(),
            iteration,
            budget: 5,
            artifacts: BTreeMap::new(),
            parameters: BTreeMap::new(),
            history: Vec::new(),
            contents: BTreeMap::new(),
        }
    }

    #[test]
    fn rtl_step_zero_writes_design_and_testbench() {
        let mut r = ScriptedReasoner::new(ScriptTable::builtin());
        let p = r.propose(&ctx(FlowStage::Rtl, 0)).unwrap();
        assert_eq!(p.writes.keys().collect::<Vec<_>>(), ["fifo.v", "fifo_tb.v"]);
    }

    #[test]
    fn exhausted_table() {
        let mut r = ScriptedReasoner::new(ScriptTable::builtin());
        let e = r.propose(&ctx(FlowStage::Rtl, 3)).unwrap_err();
        assert!(matches!(
            e,
            FlowError::ScriptExhausted {
                stage: FlowStage::Rtl,
                iteration: 3
            }
        ));
        assert!(matches!(
            r.propose(&ctx(FlowStage::Physical, 0)),
            Err(FlowError::ScriptExhausted { .. })
        ));
    }

    #[test]
    fn reflect_examples() {
        let mut r = ScriptedReasoner::new(ScriptTable::builtin());
        assert_eq!(
            r.reflect(&ctx(FlowStage::Rtl, 0), &ToolReport::pass("TEST PASS"))
                .unwrap(),
            Verdict::Accept
        );
        let fail = ToolReport::fail(vec!["full asserted early".into()], "");
        match r.reflect(&ctx(FlowStage::Rtl, 0), &fail).unwrap() {
            Verdict::Revise { proposal } => assert_eq!(proposal.writes.len(), 1),
            v => panic!("{v:?}"),
        }
        let v = r.reflect(&ctx(FlowStage::Rtl, 2), &fail).unwrap();
        assert!(matches!(v, Verdict::Abort { .. }));
        let timeout = ToolReport::with_status(ToolStatus::Timeout, "timed out", "");
        assert_ne!(
            r.reflect(&ctx(FlowStage::Rtl, 0), &timeout).unwrap(),
            Verdict::Accept
        );
    }

    #[test]
    fn script_json_round_trip_and_validation() {
        let t = ScriptTable::builtin();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(ScriptTable::from_json(&json).unwrap(), t);
        let bad = r#"{"rtl":[{"writes":{"../escape.v":"x"}}]}"#;
        assert!(matches!(
            ScriptTable::from_json(bad),
            Err(FlowError::PathTraversal(_))
        ));
        assert!(matches!(
            ScriptTable::from_json(r#"{"rtl":[{"oops":1}]}"#),
            Err(FlowError::ConfigInvalid(_))
        ));
    }
}
