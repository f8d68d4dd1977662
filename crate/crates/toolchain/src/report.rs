// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ToolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolStatus {
    Pass,
    Fail,
    CompileError,
    Timeout,
    ToolMissing,
    ParseError,
}

impl ToolStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ToolStatus::Pass => "pass",
            ToolStatus::Fail => "fail",
            ToolStatus::CompileError => "compile_error",
            ToolStatus::Timeout => "timeout",
            ToolStatus::ToolMissing => "tool_missing",
            ToolStatus::ParseError => "parse_error",
        }
    }
}

impl std::fmt::Display for ToolStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalized outcome of one tool run.
///
/// Invariant: a `pass` report has no failures. Use the constructors, or
/// [`ToolReport::validate`] for reports read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolReport {
    pub status: ToolStatus,
    #[serde(default)]
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_slack_ns: Option<f64>,
    /// Full stdout followed by stderr.
    #[serde(default)]
    pub raw_capture: String,
}

impl ToolReport {
    pub fn pass(raw_capture: impl Into<String>) -> Self {
        ToolReport {
            status: ToolStatus::Pass,
            failures: Vec::new(),
            cell_count: None,
            worst_slack_ns: None,
            raw_capture: raw_capture.into(),
        }
    }

    pub fn fail(failures: Vec<String>, raw_capture: impl Into<String>) -> Self {
        ToolReport {
            status: ToolStatus::Fail,
            failures,
            ..ToolReport::pass(raw_capture)
        }
    }

    /// A non-pass status with one explanatory message.
    pub fn with_status(
        status: ToolStatus,
        message: impl Into<String>,
        raw_capture: impl Into<String>,
    ) -> Self {
        debug_assert!(status != ToolStatus::Pass);
        ToolReport {
            status,
            failures: vec![message.into()],
            ..ToolReport::pass(raw_capture)
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == ToolStatus::Pass
    }

    pub fn validate(&self) -> Result<(), ToolError> {
        if self.is_pass() && !self.failures.is_empty() {
            return Err(ToolError::InvalidReport(
                "a pass report lists failures".into(),
            ));
        }
        if self.worst_slack_ns.is_some_and(|s| !s.is_finite()) {
            return Err(ToolError::InvalidReport("worst slack is not finite".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("report serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// One-line summary for logs.
    pub fn summary(&self) -> String {
        let mut s = self.status.to_string();
        if let Some(c) = self.cell_count {
            s.push_str(&format!(", {c} cells"));
        }
        if let Some(w) = self.worst_slack_ns {
            s.push_str(&format!(", worst slack {w} ns"));
        }
        if !self.failures.is_empty() {
            s.push_str(&format!(": {}", self.failures.join("; ")));
        }
        s
    }
}
