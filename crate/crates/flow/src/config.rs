// SPDX-License-Identifier: Apache-2.0
//! Flow configuration. Relative paths resolve against the directory of the
//! config file, and everything is checked before any stage runs.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use kws_core::dse::{Corpus, DseConfig};
use kws_toolchain::{MockAdapter, ToolPaths};

use crate::{sha256_json, FlowError, FlowStage, ScriptTable};

fn one() -> u32 {
    1
}

fn default_llm_timeout() -> f64 {
    120.0
}

fn default_tool_timeout() -> f64 {
    600.0
}

fn default_backoff_ms() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub workdir: PathBuf,
    pub stages: StagesConfig,
    #[serde(default)]
    pub reasoner: ReasonerConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<ArchitectureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtl: Option<RtlConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    /// Directory of WAV clips; the bundled corpus when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub dse: DseConfig,
    #[serde(default = "one")]
    pub budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoner: Option<ReasonerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtlConfig {
    pub adapter: AdapterConfig,
    pub budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoner: Option<ReasonerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    pub adapter: AdapterConfig,
    /// Needed for timing analysis; without it the slack gate cannot pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liberty: Option<PathBuf>,
    /// Overrides any `.sdc` artifact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdc: Option<PathBuf>,
    /// Top module; the first module declared in the sources when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
    pub budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoner: Option<ReasonerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    /// Program and arguments, run in the workdir. The stage is skipped
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default = "default_tool_timeout")]
    pub timeout_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterConfig {
    /// Replays a JSON list of tool reports.
    Mock { scenario: PathBuf },
    /// Icarus for Rtl; Yosys then OpenSTA for Synthesis.
    Tools {
        #[serde(default)]
        paths: ToolPaths,
        #[serde(default = "default_tool_timeout")]
        timeout_s: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonerKind {
    #[default]
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReasonerConfig {
    pub kind: ReasonerKind,
    /// Script table for `scripted`; the built-in FIFO script when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default = "default_llm_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig {
            kind: ReasonerKind::Scripted,
            script: None,
            endpoint: None,
            model: None,
            timeout_s: default_llm_timeout(),
            backoff_ms: default_backoff_ms(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> FlowError {
    FlowError::ConfigInvalid(msg.into())
}

pub(crate) fn seconds(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

fn check_timeout(what: &str, s: f64) -> Result<(), FlowError> {
    if s.is_finite() && s > 0.0 && s < 1e9 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what}: timeout_s must be positive, got {s}"
        )))
    }
}

fn check_budget(stage: FlowStage, budget: u32) -> Result<(), FlowError> {
    if budget == 0 {
        return Err(invalid(format!("{stage}: budget must be at least 1")));
    }
    Ok(())
}

fn check_file(what: &str, path: &Path) -> Result<(), FlowError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} {} is not a readable file",
            path.display()
        )))
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl AdapterConfig {
    fn resolve(&mut self, base: &Path) {
        if let AdapterConfig::Mock { scenario } = self {
            resolve(base, scenario);
        }
    }

    fn validate(&self, stage: FlowStage) -> Result<(), FlowError> {
        match self {
            AdapterConfig::Mock { scenario } => {
                MockAdapter::load(scenario).map_err(|e| {
                    invalid(format!("{stage} scenario {}: {e}", scenario.display()))
                })?;
                Ok(())
            }
            AdapterConfig::Tools { timeout_s, .. } => check_timeout(stage.as_str(), *timeout_s),
        }
    }
}

impl ReasonerConfig {
    fn resolve(&mut self, base: &Path) {
        if let Some(s) = &mut self.script {
            resolve(base, s);
        }
    }

    fn validate(&self, what: &str) -> Result<(), FlowError> {
        check_timeout(what, self.timeout_s)?;
        match self.kind {
            ReasonerKind::Scripted => {
                if let Some(s) = &self.script {
                    ScriptTable::load(s)?;
                }
            }
            ReasonerKind::Remote => {
                if self.endpoint.as_deref().is_none_or(str::is_empty) {
                    return Err(invalid(format!(
                        "{what}: remote reasoner needs an endpoint"
                    )));
                }
                if self.model.as_deref().is_none_or(str::is_empty) {
                    return Err(invalid(format!("{what}: remote reasoner needs a model")));
                }
            }
        }
        Ok(())
    }
}

impl FlowConfig {
    /// Parses, resolves relative paths against `base` and validates.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, FlowError> {
        let mut cfg: FlowConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        // adapters resolve relative paths against the workdir, so none may stay relative
        let base = if base.as_os_str().is_empty() {
            Path::new(".")
        } else {
            base
        };
        let base =
            std::path::absolute(base).map_err(|e| invalid(format!("{}: {e}", base.display())))?;
        cfg.resolve(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, FlowError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new("")))
    }

    fn resolve(&mut self, base: &Path) {
        resolve(base, &mut self.workdir);
        self.reasoner.resolve(base);
        let s = &mut self.stages;
        if let Some(a) = &mut s.architecture {
            if let Some(c) = &mut a.corpus {
                resolve(base, c);
            }
            if let Some(r) = &mut a.reasoner {
                r.resolve(base);
            }
        }
        if let Some(r) = &mut s.rtl {
            r.adapter.resolve(base);
            if let Some(r) = &mut r.reasoner {
                r.resolve(base);
            }
        }
        if let Some(y) = &mut s.synthesis {
            y.adapter.resolve(base);
            for p in [&mut y.liberty, &mut y.sdc].into_iter().flatten() {
                resolve(base, p);
            }
            if let Some(r) = &mut y.reasoner {
                r.resolve(base);
            }
        }
    }

    /// Checks everything a run depends on, without side effects.
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.workdir.as_os_str().is_empty() {
            return Err(invalid("workdir is empty"));
        }
        if self.workdir.exists() && !self.workdir.is_dir() {
            return Err(invalid(format!(
                "workdir {} is not a directory",
                self.workdir.display()
            )));
        }
        if self.configured().is_empty() {
            return Err(invalid("no stages configured"));
        }
        self.reasoner.validate("reasoner")?;
        let s = &self.stages;
        if let Some(a) = &s.architecture {
            check_budget(FlowStage::Architecture, a.budget)?;
            if let Some(dir) = &a.corpus {
                Corpus::load_dir(dir)
                    .map_err(|e| invalid(format!("corpus {}: {e}", dir.display())))?;
            }
            if let Some(r) = &a.reasoner {
                r.validate("architecture reasoner")?;
            }
        }
        if let Some(r) = &s.rtl {
            check_budget(FlowStage::Rtl, r.budget)?;
            r.adapter.validate(FlowStage::Rtl)?;
            if let Some(r) = &r.reasoner {
                r.validate("rtl reasoner")?;
            }
        }
        if let Some(y) = &s.synthesis {
            check_budget(FlowStage::Synthesis, y.budget)?;
            y.adapter.validate(FlowStage::Synthesis)?;
            if let Some(l) = &y.liberty {
                check_file("liberty", l)?;
            }
            if let Some(c) = &y.sdc {
                check_file("sdc", c)?;
            }
            if let Some(r) = &y.reasoner {
                r.validate("synthesis reasoner")?;
            }
        }
        if let Some(p) = &s.physical {
            check_timeout("physical", p.timeout_s)?;
            if p.command
                .as_ref()
                .is_some_and(|c| c.is_empty() || c[0].is_empty())
            {
                return Err(invalid("physical: command is empty"));
            }
        }
        Ok(())
    }

    /// Configured stages with their budgets, in execution order.
    pub fn configured(&self) -> Vec<(FlowStage, u32)> {
        let s = &self.stages;
        let mut out = Vec::new();
        if let Some(a) = &s.architecture {
            out.push((FlowStage::Architecture, a.budget));
        }
        if let Some(r) = &s.rtl {
            out.push((FlowStage::Rtl, r.budget));
        }
        if let Some(y) = &s.synthesis {
            out.push((FlowStage::Synthesis, y.budget));
        }
        if s.physical.is_some() {
            out.push((FlowStage::Physical, 1));
        }
        out
    }

    /// Reasoner settings for `stage`: its own, else the flow-wide one.
    pub fn reasoner_for(&self, stage: FlowStage) -> &ReasonerConfig {
        let own = match stage {
            FlowStage::Architecture => self
                .stages
                .architecture
                .as_ref()
                .and_then(|a| a.reasoner.as_ref()),
            FlowStage::Rtl => self.stages.rtl.as_ref().and_then(|r| r.reasoner.as_ref()),
            FlowStage::Synthesis => self
                .stages
                .synthesis
                .as_ref()
                .and_then(|y| y.reasoner.as_ref()),
            FlowStage::Physical => None,
        };
        own.unwrap_or(&self.reasoner)
    }

    /// SHA-256 of the resolved configuration; checkpoints are bound to it.
    pub fn hash(&self) -> String {
        sha256_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = r#"[{"status":"pass"}]"#;

    fn dir_with_scenario() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        std::fs::write(d.path().join("scenario.json"), SCENARIO).unwrap();
        d
    }

    #[test]
    fn minimal_rtl_config() {
        let d = dir_with_scenario();
        let text = r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"mock","scenario":"scenario.json"},"budget":3}}}"#;
        let cfg = FlowConfig::from_json(text, d.path()).unwrap();
        assert_eq!(cfg.workdir, d.path().join("ws"));
        assert_eq!(cfg.configured(), [(FlowStage::Rtl, 3)]);
        assert_eq!(
            cfg.reasoner_for(FlowStage::Rtl).kind,
            ReasonerKind::Scripted
        );
        assert_eq!(
            cfg.hash(),
            FlowConfig::from_json(text, d.path()).unwrap().hash()
        );
    }

    #[test]
    fn paths_become_absolute_for_a_bare_base() {
        let text = r#"{"workdir":"ws","stages":{"physical":{"command":["true"]}}}"#;
        let cfg = FlowConfig::from_json(text, Path::new("")).unwrap();
        assert!(cfg.workdir.is_absolute());
        assert_eq!(cfg.workdir, std::env::current_dir().unwrap().join("ws"));
    }

    #[test]
    fn rejections() {
        let d = dir_with_scenario();
        let cases = [
            r#"{"workdir":"ws","stages":{}}"#,
            r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"mock","scenario":"scenario.json"},"budget":0}}}"#,
            r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"mock","scenario":"missing.json"},"budget":1}}}"#,
            r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"magic"},"budget":1}}}"#,
            r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"mock","scenario":"scenario.json"},"budget":1}},"reasoner":{"kind":"remote"}}"#,
            r#"{"workdir":"ws","stages":{"physical":{"command":[]}}}"#,
            r#"{"workdir":"ws","stages":{"architecture":{"dse":{"bogus":1}}}}"#,
            r#"{"workdir":"ws","stages":{},"extra":true}"#,
            r#"{"workdir":"ws""#,
        ];
        for text in cases {
            assert!(
                matches!(
                    FlowConfig::from_json(text, d.path()),
                    Err(FlowError::ConfigInvalid(_))
                ),
                "{text}"
            );
        }
        assert!(!d.path().join("ws").exists());
    }

    #[test]
    fn stage_reasoner_overrides_flow_reasoner() {
        let d = dir_with_scenario();
        let text = r#"{"workdir":"ws","stages":{"rtl":{"adapter":{"kind":"mock","scenario":"scenario.json"},"budget":1,
            "reasoner":{"kind":"remote","endpoint":"http://127.0.0.1:9/v1","model":"m"}},"physical":{}}}"#;
        let cfg = FlowConfig::from_json(text, d.path()).unwrap();
        assert_eq!(cfg.reasoner_for(FlowStage::Rtl).kind, ReasonerKind::Remote);
        assert_eq!(
            cfg.reasoner_for(FlowStage::Physical).kind,
            ReasonerKind::Scripted
        );
        assert_eq!(
            cfg.configured(),
            [(FlowStage::Rtl, 1), (FlowStage::Physical, 1)]
        );
    }
}
