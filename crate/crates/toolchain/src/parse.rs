// SPDX-License-Identifier: Apache-2.0
//! Report parsers. Every parser is total: any byte string yields a
//! [`ToolReport`], with `parse_error` when the expected line is absent.

use std::sync::LazyLock;

use regex::Regex;

use crate::{ToolReport, ToolStatus};

static CELLS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^\s*Number of cells:\s+(\d+)\s*$").unwrap());
// newer Yosys releases print "<n> cells" in the statistics block
static CELLS_SHORT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^\s*(\d+)\s+cells\s*$").unwrap());
static SLACK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)worst slack(?:\s+(?:max|min))?\s+([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")
        .unwrap()
});

/// Testbench convention: a `TEST PASS` line, or one `TEST FAIL: <msg>`
/// line per failure. Any failure wins over a pass line.
pub fn parse_simulation(raw: &[u8]) -> ToolReport {
    let text = String::from_utf8_lossy(raw).into_owned();
    let mut failures = Vec::new();
    let mut passed = false;
    for line in text.lines().map(str::trim) {
        if let Some(rest) = line.strip_prefix("TEST FAIL") {
            let msg = rest.trim_start().strip_prefix(':').unwrap_or(rest).trim();
            failures.push(if msg.is_empty() {
                "unspecified failure".to_string()
            } else {
                msg.to_string()
            });
        } else if line == "TEST PASS" {
            passed = true;
        }
    }
    if !failures.is_empty() {
        ToolReport::fail(failures, text)
    } else if passed {
        ToolReport::pass(text)
    } else {
        ToolReport::with_status(
            ToolStatus::ParseError,
            "no TEST PASS or TEST FAIL line",
            text,
        )
    }
}

/// Cell count from the last statistics block; the last block is the
/// hierarchy total when several modules are reported.
pub fn parse_synthesis(raw: &[u8]) -> ToolReport {
    let text = String::from_utf8_lossy(raw).into_owned();
    let last = CELLS
        .captures_iter(&text)
        .last()
        .or_else(|| CELLS_SHORT.captures_iter(&text).last())
        .map(|c| c[1].parse::<u64>());
    match last {
        Some(Ok(n)) => ToolReport {
            cell_count: Some(n),
            ..ToolReport::pass(text)
        },
        Some(Err(_)) => {
            ToolReport::with_status(ToolStatus::ParseError, "cell count out of range", text)
        }
        None => ToolReport::with_status(
            ToolStatus::ParseError,
            "no cell count in synthesis output",
            text,
        ),
    }
}

/// Worst slack in ns, the minimum over all `worst slack` lines. Negative
/// slack is a failure.
pub fn parse_sta(raw: &[u8]) -> ToolReport {
    let text = String::from_utf8_lossy(raw).into_owned();
    let slacks: Vec<f64> = SLACK
        .captures_iter(&text)
        .filter_map(|c| c[1].parse::<f64>().ok())
        .collect();
    let Some(worst) = slacks.iter().copied().reduce(f64::min) else {
        return ToolReport::with_status(ToolStatus::ParseError, "no worst slack line", text);
    };
    if !worst.is_finite() {
        return ToolReport::with_status(ToolStatus::ParseError, "worst slack is not finite", text);
    }
    let mut report = if worst < 0.0 {
        ToolReport::fail(vec!["timing violation".into()], text)
    } else {
        ToolReport::pass(text)
    };
    report.worst_slack_ns = Some(worst);
    report
}
