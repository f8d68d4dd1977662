// SPDX-License-Identifier: Apache-2.0
//! Hermetic adapter that replays a scenario of recorded reports.

use std::path::Path;

use crate::{ToolError, ToolReport};

/// Returns the scenario's reports in order and counts calls.
#[derive(Debug, Clone, PartialEq)]
pub struct MockAdapter {
    reports: Vec<ToolReport>,
    calls: usize,
}

impl MockAdapter {
    pub fn new(reports: Vec<ToolReport>) -> Result<Self, ToolError> {
        for r in &reports {
            r.validate()?;
        }
        Ok(MockAdapter { reports, calls: 0 })
    }

    /// Parses a scenario: a JSON list of reports.
    pub fn from_json(text: &str) -> Result<Self, ToolError> {
        let reports: Vec<ToolReport> =
            serde_json::from_str(text).map_err(|e| ToolError::Scenario(e.to_string()))?;
        Self::new(reports)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ToolError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Continues a scenario after `calls` earlier invocations.
    pub fn resume_at(mut self, calls: usize) -> Self {
        self.calls = calls;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn next_report(&mut self) -> Result<ToolReport, ToolError> {
        let r = self
            .reports
            .get(self.calls)
            .cloned()
            .ok_or(ToolError::ScenarioExhausted {
                len: self.reports.len(),
            })?;
        self.calls += 1;
        Ok(r)
    }
}
