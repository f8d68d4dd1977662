// SPDX-License-Identifier: Apache-2.0
//! The stage loop. One [`FlowRunner::step`] performs exactly one tool
//! invocation, so a checkpoint between steps falls on an iteration
//! boundary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use kws_core::dse::{run_dse, Corpus, DseConfig, DseError, DseReport};
use kws_toolchain::{
    declared_modules, run_command, MockAdapter, Simulator, Synthesizer, TimingAnalyzer, ToolReport,
    ToolStatus,
};

use crate::config::seconds;
use crate::{
    load_checkpoint, safe_relative_path, save_checkpoint, ActionRecord, AdapterConfig, FlowConfig,
    FlowError, FlowStage, FlowState, Proposal, Reasoner, ReasonerConfig, ReasonerKind,
    RemoteReasoner, ScriptTable, ScriptedReasoner, StageContext, StageStatus, Verdict, VerdictKind,
    HISTORY_WINDOW,
};

/// Written by the Architecture stage.
pub const DESIGN_POINT_FILE: &str = "design_point.json";
pub const DSE_REPORT_FILE: &str = "dse_report.json";

enum StageTool {
    Dse {
        corpus: Corpus,
        base: DseConfig,
    },
    Mock(MockAdapter),
    Simulate(Simulator),
    Synthesize {
        synth: Synthesizer,
        sta: TimingAnalyzer,
        liberty: Option<PathBuf>,
        sdc: Option<PathBuf>,
        top: Option<String>,
    },
    Command {
        argv: Vec<String>,
        timeout: Duration,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// One tool invocation ran in this stage.
    Invoked(FlowStage),
    /// Every configured stage has a final status.
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverallStatus {
    /// Every configured stage passed.
    Success,
    /// Nothing failed, but a configured stage was skipped.
    Partial,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: FlowStage,
    pub status: StageStatus,
    pub iterations: u32,
    pub budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// An [`ActionRecord`] without its wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub stage: FlowStage,
    pub iteration: u32,
    pub proposal_digest: String,
    pub report_digest: String,
    pub report_status: ToolStatus,
    pub verdict: VerdictKind,
}

/// Outcome of a finished flow. Contains no timing or host paths, so
/// deterministic components give byte-identical results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub status: OverallStatus,
    pub stages: Vec<StageOutcome>,
    /// Workspace-relative path → content digest.
    pub artifacts: BTreeMap<String, String>,
    pub history: Vec<HistoryEntry>,
}

impl FlowResult {
    pub fn from_state(state: &FlowState) -> Self {
        let stages: Vec<StageOutcome> = state
            .stages
            .iter()
            .map(|(&stage, st)| StageOutcome {
                stage,
                status: st.status,
                iterations: st.iterations,
                budget: st.budget,
                note: st.note.clone(),
            })
            .collect();
        let status = if stages.iter().all(|s| s.status == StageStatus::Passed) {
            OverallStatus::Success
        } else if stages
            .iter()
            .all(|s| matches!(s.status, StageStatus::Passed | StageStatus::Skipped))
        {
            OverallStatus::Partial
        } else {
            OverallStatus::Failed
        };
        let history = state
            .history
            .iter()
            .map(|r| HistoryEntry {
                stage: r.stage,
                iteration: r.iteration,
                proposal_digest: r.proposal_digest.clone(),
                report_digest: r.report_digest.clone(),
                report_status: r.report_status,
                verdict: r.verdict,
            })
            .collect();
        FlowResult {
            status,
            stages,
            artifacts: state.artifacts.clone(),
            history,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

fn build_reasoner(cfg: &ReasonerConfig) -> Result<Box<dyn Reasoner>, FlowError> {
    Ok(match cfg.kind {
        ReasonerKind::Scripted => {
            let table = match &cfg.script {
                Some(p) => ScriptTable::load(p)?,
                None => ScriptTable::builtin(),
            };
            Box::new(ScriptedReasoner::new(table))
        }
        ReasonerKind::Remote => {
            let endpoint = cfg
                .endpoint
                .as_deref()
                .ok_or_else(|| FlowError::ConfigInvalid("remote endpoint".into()))?;
            let model = cfg
                .model
                .as_deref()
                .ok_or_else(|| FlowError::ConfigInvalid("remote model".into()))?;
            let mut r = RemoteReasoner::new(endpoint, model, seconds(cfg.timeout_s));
            r.backoff = Duration::from_millis(cfg.backoff_ms);
            Box::new(r)
        }
    })
}

fn build_adapter(
    adapter: &AdapterConfig,
    stage: FlowStage,
    state: &FlowState,
) -> Result<Option<MockAdapter>, FlowError> {
    match adapter {
        AdapterConfig::Mock { scenario } => Ok(Some(
            MockAdapter::load(scenario)?.resume_at(state.invocations(stage)),
        )),
        AdapterConfig::Tools { .. } => Ok(None),
    }
}

/// Drives a flow one tool invocation at a time.
pub struct FlowRunner {
    config: FlowConfig,
    config_hash: String,
    state: FlowState,
    tools: BTreeMap<FlowStage, StageTool>,
    reasoners: BTreeMap<FlowStage, Box<dyn Reasoner>>,
}

impl FlowRunner {
    /// Validates `config`; nothing is written until the first step.
    pub fn new(config: FlowConfig) -> Result<Self, FlowError> {
        config.validate()?;
        let state = FlowState::new(config.configured());
        Self::with_state(config, state)
    }

    /// Continues from a checkpoint taken under the same config.
    pub fn resume(config: FlowConfig, checkpoint: &Path) -> Result<Self, FlowError> {
        config.validate()?;
        let state = load_checkpoint(checkpoint, &config.hash())?;
        Self::with_state(config, state)
    }

    fn with_state(config: FlowConfig, state: FlowState) -> Result<Self, FlowError> {
        let mut tools = BTreeMap::new();
        let mut reasoners = BTreeMap::new();
        let s = &config.stages;
        if let Some(a) = &s.architecture {
            let corpus = match &a.corpus {
                Some(dir) => {
                    Corpus::load_dir(dir).map_err(|e| FlowError::ConfigInvalid(e.to_string()))?
                }
                None => Corpus::bundled(),
            };
            tools.insert(
                FlowStage::Architecture,
                StageTool::Dse {
                    corpus,
                    base: a.dse.clone(),
                },
            );
        }
        if let Some(r) = &s.rtl {
            let tool = match (
                build_adapter(&r.adapter, FlowStage::Rtl, &state)?,
                &r.adapter,
            ) {
                (Some(mock), _) => StageTool::Mock(mock),
                (None, AdapterConfig::Tools { paths, timeout_s }) => {
                    StageTool::Simulate(Simulator {
                        paths: paths.clone(),
                        timeout: seconds(*timeout_s),
                    })
                }
                (None, AdapterConfig::Mock { .. }) => {
                    unreachable!("mock adapters are always built")
                }
            };
            tools.insert(FlowStage::Rtl, tool);
        }
        if let Some(y) = &s.synthesis {
            let tool = match (
                build_adapter(&y.adapter, FlowStage::Synthesis, &state)?,
                &y.adapter,
            ) {
                (Some(mock), _) => StageTool::Mock(mock),
                (None, AdapterConfig::Tools { paths, timeout_s }) => StageTool::Synthesize {
                    synth: Synthesizer {
                        paths: paths.clone(),
                        timeout: seconds(*timeout_s),
                    },
                    sta: TimingAnalyzer {
                        paths: paths.clone(),
                        timeout: seconds(*timeout_s),
                    },
                    liberty: y.liberty.clone(),
                    sdc: y.sdc.clone(),
                    top: y.top.clone(),
                },
                (None, AdapterConfig::Mock { .. }) => {
                    unreachable!("mock adapters are always built")
                }
            };
            tools.insert(FlowStage::Synthesis, tool);
        }
        if let Some(p) = &s.physical {
            if let Some(argv) = &p.command {
                tools.insert(
                    FlowStage::Physical,
                    StageTool::Command {
                        argv: argv.clone(),
                        timeout: seconds(p.timeout_s),
                    },
                );
            }
        }
        for (stage, _) in config.configured() {
            if stage != FlowStage::Physical {
                reasoners.insert(stage, build_reasoner(config.reasoner_for(stage))?);
            }
        }
        let config_hash = config.hash();
        Ok(FlowRunner {
            config,
            config_hash,
            state,
            tools,
            reasoners,
        })
    }

    /// Replaces the reasoner of `stage`.
    pub fn set_reasoner(&mut self, stage: FlowStage, reasoner: Box<dyn Reasoner>) {
        self.reasoners.insert(stage, reasoner);
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<(), FlowError> {
        save_checkpoint(path, &self.config_hash, &self.state)
    }

    /// Calls served so far by the mock adapter of `stage`, if it has one.
    pub fn mock_calls(&self, stage: FlowStage) -> Option<usize> {
        match self.tools.get(&stage) {
            Some(StageTool::Mock(m)) => Some(m.calls()),
            _ => None,
        }
    }

    /// Runs to completion, saving a checkpoint after every step when
    /// `checkpoint` is given.
    pub fn run(&mut self, checkpoint: Option<&Path>) -> Result<FlowResult, FlowError> {
        loop {
            let outcome = self.step()?;
            if let Some(path) = checkpoint {
                self.save_checkpoint(path)?;
            }
            if outcome == StepOutcome::Finished {
                return Ok(FlowResult::from_state(&self.state));
            }
        }
    }

    /// Advances to the next tool invocation and performs it. Stage
    /// transitions that need no tool happen within the same step.
    pub fn step(&mut self) -> Result<StepOutcome, FlowError> {
        std::fs::create_dir_all(&self.config.workdir)?;
        loop {
            let Some(stage) = self.state.current else {
                return Ok(StepOutcome::Finished);
            };
            let st = &self.state.stages[&stage];
            match st.status {
                StageStatus::Passed | StageStatus::Failed | StageStatus::Skipped => {
                    self.state.current = self.state.after(stage);
                }
                StageStatus::Pending
                    if stage == FlowStage::Physical && !self.tools.contains_key(&stage) =>
                {
                    self.finish(
                        stage,
                        StageStatus::Skipped,
                        Some("no physical-design command configured".into()),
                    );
                }
                StageStatus::Pending | StageStatus::Running => {
                    self.stage_mut(stage).status = StageStatus::Running;
                    let proposal = match self.state.stages[&stage].pending.clone() {
                        Some(p) => p,
                        None => match self.propose(stage) {
                            Ok(p) => p,
                            Err(e) if e.is_reasoner_fault() => {
                                self.fail(stage, e.to_string());
                                continue;
                            }
                            Err(e) => return Err(e),
                        },
                    };
                    if self.iterate(stage, proposal)? {
                        return Ok(StepOutcome::Invoked(stage));
                    }
                }
            }
        }
    }

    fn stage_mut(&mut self, stage: FlowStage) -> &mut crate::StageState {
        self.state.stages.get_mut(&stage).expect("configured stage")
    }

    fn context(&self, stage: FlowStage, iteration: u32) -> StageContext {
        let st = &self.state.stages[&stage];
        let skip = self.state.history.len().saturating_sub(HISTORY_WINDOW);
        StageContext {
            stage,
            goal: stage.goal().to_string(),
            iteration,
            budget: st.budget,
            artifacts: self.state.artifacts.clone(),
            parameters: self
                .state
                .parameters
                .get(&stage)
                .cloned()
                .unwrap_or_default(),
            history: self.state.history[skip..].to_vec(),
            contents: self
                .state
                .artifacts
                .keys()
                .filter_map(|p| Some((p.clone(), self.state.artifact(p)?.to_string())))
                .collect(),
        }
    }

    fn propose(&mut self, stage: FlowStage) -> Result<Proposal, FlowError> {
        if stage == FlowStage::Physical {
            return Ok(Proposal {
                rationale: "Run the configured command.".into(),
                ..Proposal::default()
            });
        }
        let ctx = self.context(stage, self.state.stages[&stage].iterations);
        let reasoner = self
            .reasoners
            .get_mut(&stage)
            .expect("reasoner for every reasoning stage");
        let p = reasoner.propose(&ctx)?;
        p.validate()?;
        Ok(p)
    }

    /// Applies `proposal`, runs the tool once, reflects and records.
    /// Returns false when the proposal was rejected before the tool ran.
    fn iterate(&mut self, stage: FlowStage, proposal: Proposal) -> Result<bool, FlowError> {
        let st = &self.state.stages[&stage];
        debug_assert!(st.iterations < st.budget);
        let iteration = st.iterations;
        self.stage_mut(stage).pending = Some(proposal.clone());
        match self.apply(stage, &proposal) {
            Ok(()) => {}
            Err(e @ FlowError::PathTraversal(_)) => {
                self.fail(stage, e.to_string());
                return Ok(false);
            }
            Err(e) => return Err(e),
        }
        let start = Instant::now();
        let report = gate(stage, self.run_tool(stage)?);
        let ctx = self.context(stage, iteration);
        let reflected = match self.reasoners.get_mut(&stage) {
            Some(r) => r.reflect(&ctx, &report),
            None if report.is_pass() => Ok(Verdict::Accept),
            None => Ok(Verdict::Abort {
                reason: report.summary(),
            }),
        };
        let verdict = match reflected {
            Ok(Verdict::Accept) if !report.is_pass() => Verdict::Abort {
                reason: format!("reasoner accepted a {} report", report.status),
            },
            Ok(v) => match v.validate() {
                Ok(()) => v,
                Err(e) => Verdict::Abort {
                    reason: e.to_string(),
                },
            },
            Err(e) if e.is_reasoner_fault() => Verdict::Abort {
                reason: e.to_string(),
            },
            Err(e) => return Err(e),
        };
        self.state.history.push(ActionRecord {
            stage,
            iteration,
            proposal_digest: proposal.digest(),
            report_digest: report.digest(),
            report_status: report.status,
            verdict: verdict.kind(),
            wall_time_ms: start.elapsed().as_millis() as u64,
        });
        let st = self.stage_mut(stage);
        st.iterations += 1;
        st.pending = None;
        let (iterations, budget) = (st.iterations, st.budget);
        match verdict {
            Verdict::Accept => self.finish(stage, StageStatus::Passed, None),
            Verdict::Revise { .. } if iterations >= budget => self.fail(
                stage,
                format!(
                    "budget of {budget} iterations exhausted ({})",
                    report.summary()
                ),
            ),
            Verdict::Revise { proposal } => self.stage_mut(stage).pending = Some(proposal),
            Verdict::Abort { reason } => self.fail(stage, reason),
        }
        Ok(true)
    }

    /// Writes every file of `proposal` (after checking all paths) and
    /// merges its parameters.
    fn apply(&mut self, stage: FlowStage, proposal: &Proposal) -> Result<(), FlowError> {
        proposal.validate()?;
        for (path, content) in &proposal.writes {
            self.write_artifact(path, content)?;
        }
        if !proposal.parameters.is_empty() {
            let params = self.state.parameters.entry(stage).or_default();
            params.extend(
                proposal
                    .parameters
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone())),
            );
        }
        Ok(())
    }

    fn write_artifact(&mut self, path: &str, content: &str) -> Result<(), FlowError> {
        let rel = safe_relative_path(path)?;
        let root = &self.config.workdir;
        let target = root.join(&rel);
        let parent = target.parent().expect("joined path has a parent");
        std::fs::create_dir_all(parent)?;
        // a symlinked directory or file inside the workspace must not lead out of it
        if !parent.canonicalize()?.starts_with(root.canonicalize()?) {
            return Err(FlowError::PathTraversal(path.to_string()));
        }
        if target
            .symlink_metadata()
            .is_ok_and(|m| m.file_type().is_symlink())
        {
            return Err(FlowError::PathTraversal(path.to_string()));
        }
        std::fs::write(&target, content)?;
        self.state.put_artifact(path, content);
        Ok(())
    }

    fn run_tool(&mut self, stage: FlowStage) -> Result<ToolReport, FlowError> {
        let workdir = self.config.workdir.clone();
        let params = self
            .state
            .parameters
            .get(&stage)
            .cloned()
            .unwrap_or_default();
        let tool = self
            .tools
            .get_mut(&stage)
            .expect("tool for every runnable stage");
        let sources = verilog_sources(&self.state);
        match tool {
            StageTool::Mock(m) => Ok(m.next_report()?),
            StageTool::Dse { corpus, base } => {
                let cfg = match with_overrides(base, &params) {
                    Ok(c) => c,
                    Err(msg) => return Ok(ToolReport::fail(vec![msg], "")),
                };
                let corpus = corpus.clone();
                self.explore(&corpus, &cfg)
            }
            StageTool::Simulate(sim) => {
                let benches: Vec<PathBuf> = sources
                    .iter()
                    .filter(|p| is_testbench(p))
                    .cloned()
                    .collect();
                let designs: Vec<PathBuf> = sources
                    .iter()
                    .filter(|p| !is_testbench(p))
                    .cloned()
                    .collect();
                let [bench] = benches.as_slice() else {
                    return Ok(ToolReport::with_status(
                        ToolStatus::CompileError,
                        format!(
                            "expected exactly one *_tb.v testbench, found {}",
                            benches.len()
                        ),
                        "",
                    ));
                };
                Ok(sim.run(&designs, bench, &workdir)?)
            }
            StageTool::Synthesize {
                synth,
                sta,
                liberty,
                sdc,
                top,
            } => {
                let designs: Vec<PathBuf> =
                    sources.into_iter().filter(|p| !is_testbench(p)).collect();
                let top = top.clone().or_else(|| {
                    designs.iter().find_map(|p| {
                        let text = self.state.artifact(p.to_str()?)?;
                        declared_modules(text).into_iter().next()
                    })
                });
                let synthesized =
                    synth.run(&designs, top.as_deref(), liberty.as_deref(), &workdir)?;
                let sdc = sdc.clone().or_else(|| {
                    self.state
                        .artifacts
                        .keys()
                        .find(|p| p.ends_with(".sdc"))
                        .map(PathBuf::from)
                });
                let (Some(liberty), Some(sdc), Some(top), true) =
                    (liberty, sdc, top, synthesized.is_pass())
                else {
                    return Ok(synthesized);
                };
                let mut timed =
                    sta.run(&Synthesizer::netlist_path(), &sdc, liberty, &top, &workdir)?;
                timed.cell_count = synthesized.cell_count;
                timed.raw_capture = format!("{}{}", synthesized.raw_capture, timed.raw_capture);
                Ok(timed)
            }
            StageTool::Command { argv, timeout } => Ok(run_command(argv, &workdir, *timeout)?),
        }
    }

    /// The Architecture stage's tool: a full exploration whose report and
    /// chosen point become artifacts.
    fn explore(&mut self, corpus: &Corpus, cfg: &DseConfig) -> Result<ToolReport, FlowError> {
        let (report, error) = match run_dse(corpus, cfg) {
            Ok(r) => (r, None),
            Err(DseError::Aborted { source, report }) => (*report, Some(source.to_string())),
            Err(DseError::Io(e)) => return Err(FlowError::Io(e)),
            Err(e) => return Ok(ToolReport::fail(vec![e.to_string()], "")),
        };
        self.write_artifact(DSE_REPORT_FILE, &pretty(&report))?;
        let summary = dse_summary(&report);
        match (error, &report.chosen_point) {
            (None, Some(point)) => {
                self.write_artifact(DESIGN_POINT_FILE, &pretty(point))?;
                Ok(ToolReport::pass(summary))
            }
            (error, _) => Ok(ToolReport::fail(
                vec![error.unwrap_or_else(|| "no design point chosen".into())],
                summary,
            )),
        }
    }

    fn finish(&mut self, stage: FlowStage, status: StageStatus, note: Option<String>) {
        let st = self.stage_mut(stage);
        st.status = status;
        st.note = note;
        st.pending = None;
        self.state.current = self.state.after(stage);
    }

    /// Marks `stage` failed and every later stage skipped.
    fn fail(&mut self, stage: FlowStage, note: String) {
        self.finish(stage, StageStatus::Failed, Some(note));
        let later: Vec<FlowStage> = self
            .state
            .stages
            .keys()
            .copied()
            .filter(|&s| s > stage)
            .collect();
        for s in later {
            let st = self.stage_mut(s);
            st.status = StageStatus::Skipped;
            st.note = Some(format!("not run after {stage} failed"));
        }
        self.state.current = None;
    }
}

/// Stage-specific acceptance on top of the tool's own status: synthesis
/// passes only with a reported, non-negative worst slack.
fn gate(stage: FlowStage, report: ToolReport) -> ToolReport {
    if stage != FlowStage::Synthesis || !report.is_pass() {
        return report;
    }
    match report.worst_slack_ns {
        Some(s) if s >= 0.0 => report,
        Some(_) => ToolReport {
            status: ToolStatus::Fail,
            failures: vec!["timing violation".into()],
            ..report
        },
        None => ToolReport {
            status: ToolStatus::Fail,
            failures: vec!["worst slack not reported".into()],
            ..report
        },
    }
}

fn is_testbench(p: &Path) -> bool {
    p.to_str()
        .is_some_and(|s| s.ends_with("_tb.v") || s.ends_with("_tb.sv"))
}

/// Verilog artifacts in path order.
fn verilog_sources(state: &FlowState) -> Vec<PathBuf> {
    state
        .artifacts
        .keys()
        .filter(|p| p.ends_with(".v") || p.ends_with(".sv"))
        .map(PathBuf::from)
        .collect()
}

/// `base` with top-level fields replaced by `params`.
fn with_overrides(base: &DseConfig, params: &BTreeMap<String, Value>) -> Result<DseConfig, String> {
    if params.is_empty() {
        return Ok(base.clone());
    }
    let mut v = serde_json::to_value(base).expect("config serializes");
    let obj = v.as_object_mut().expect("config is an object");
    for (k, val) in params {
        obj.insert(k.clone(), val.clone());
    }
    let mut cfg: DseConfig =
        serde_json::from_value(v).map_err(|e| format!("invalid exploration parameters: {e}"))?;
    cfg.jobs = base.jobs;
    Ok(cfg)
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn dse_summary(report: &DseReport) -> String {
    let mut s = String::new();
    for d in &report.decisions {
        let chosen = d
            .selected
            .as_ref()
            .map_or_else(|| "none".to_string(), Value::to_string);
        s.push_str(&format!("{}: {chosen}\n", d.decision));
    }
    if let Some(e) = &report.error {
        s.push_str(&format!("error: {e}\n"));
    }
    s
}

/// Validates `config` and runs every configured stage.
pub fn run_flow(config: FlowConfig) -> Result<FlowResult, FlowError> {
    FlowRunner::new(config)?.run(None)
}
