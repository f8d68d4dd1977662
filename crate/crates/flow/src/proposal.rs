// SPDX-License-Identifier: Apache-2.0
//! What reasoners return: proposals to apply and verdicts on tool reports.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use kws_toolchain::SCRATCH_DIR;

use crate::{sha256_json, FlowError};

/// Artifact writes, parameter assignments and the reasoning behind them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Proposal {
    /// Workspace-relative path → full file content.
    #[serde(default)]
    pub writes: BTreeMap<String, String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub rationale: String,
}

impl Proposal {
    pub fn is_empty(&self) -> bool {
        self.writes.is_empty() && self.parameters.is_empty()
    }

    /// Every write path must stay inside the workspace.
    pub fn validate(&self) -> Result<(), FlowError> {
        for path in self.writes.keys() {
            safe_relative_path(path)?;
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        sha256_json(self)
    }
}

/// Checks that `path` names a file strictly inside the workspace: relative,
/// only normal components, and outside the tool scratch directory.
pub fn safe_relative_path(path: &str) -> Result<PathBuf, FlowError> {
    let reject = || FlowError::PathTraversal(path.to_string());
    let p = Path::new(path);
    // Path::components hides "." and empty segments, so check the raw text too
    if path.contains('\0')
        || path.contains('\\')
        || path.split('/').any(|seg| matches!(seg, "" | "." | ".."))
    {
        return Err(reject());
    }
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            Component::Normal(part) => out.push(part),
            _ => return Err(reject()),
        }
    }
    if out.as_os_str().is_empty() || out.starts_with(SCRATCH_DIR) {
        return Err(reject());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Accept,
    Revise,
    Abort,
}

/// A reasoner's judgement of one tool report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case", deny_unknown_fields)]
pub enum Verdict {
    Accept,
    /// Invariant: the proposal is not empty.
    Revise {
        proposal: Proposal,
    },
    Abort {
        reason: String,
    },
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Accept => VerdictKind::Accept,
            Verdict::Revise { .. } => VerdictKind::Revise,
            Verdict::Abort { .. } => VerdictKind::Abort,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        match self {
            Verdict::Revise { proposal } if proposal.is_empty() => Err(FlowError::SchemaViolation(
                "revise carries an empty proposal".into(),
            )),
            Verdict::Revise { proposal } => proposal.validate(),
            _ => Ok(()),
        }
    }
}
