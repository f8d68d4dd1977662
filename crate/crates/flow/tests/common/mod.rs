// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::path::Path;

use kws_flow::FlowConfig;
use kws_toolchain::{ToolReport, ToolStatus};

pub fn report(status: ToolStatus) -> ToolReport {
    match status {
        ToolStatus::Pass => ToolReport::pass("TEST PASS\n"),
        ToolStatus::Fail => ToolReport::fail(
            vec!["full asserted early".into()],
            "TEST FAIL: full asserted early\n",
        ),
        s => ToolReport::with_status(s, s.as_str(), ""),
    }
}

pub fn write_scenario(dir: &Path, name: &str, reports: &[ToolReport]) {
    std::fs::write(dir.join(name), serde_json::to_string(reports).unwrap()).unwrap();
}

/// Rtl-only flow over `scenario.json` in `dir`, working in `dir/ws`.
pub fn rtl_config(dir: &Path, budget: u32) -> FlowConfig {
    let text = format!(
        r#"{{"workdir":"ws","stages":{{"rtl":{{"adapter":{{"kind":"mock","scenario":"scenario.json"}},"budget":{budget}}}}}}}"#
    );
    FlowConfig::from_json(&text, dir).unwrap()
}

pub fn rtl_scenario(dir: &Path, statuses: &[ToolStatus]) {
    let reports: Vec<ToolReport> = statuses.iter().map(|&s| report(s)).collect();
    write_scenario(dir, "scenario.json", &reports);
}
