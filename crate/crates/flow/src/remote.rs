// SPDX-License-Identifier: Apache-2.0
//! Reasoner backed by a chat-completion endpoint.
//!
//! One POST per propose/reflect with a system and a user message. The reply
//! text must hold exactly one fenced block whose body parses as the
//! expected JSON schema. Transport and schema failures are retried with
//! exponential backoff, three attempts in total.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use kws_toolchain::ToolReport;

use crate::{FlowError, Proposal, Reasoner, StageContext, Verdict};

/// Bearer token for the endpoint, read once at construction.
pub const API_KEY_ENV: &str = "AIEDA_LLM_API_KEY";

const ATTEMPTS: u32 = 3;
// artifacts larger than this are shown by digest only
const INLINE_LIMIT: usize = 16 * 1024;

const SYSTEM_PROMPT: &str = "You are a hardware design agent driving an RTL-to-GDS flow. \
Answer with exactly one fenced ```json code block and nothing else inside fences.";

const PROPOSAL_SCHEMA: &str = r#"{"writes": {"<relative path>": "<full file content>"}, "parameters": {"<key>": <json value>}, "rationale": "<text>"}"#;

const VERDICT_SCHEMA: &str = r#"{"verdict": "accept"} | {"verdict": "revise", "proposal": <proposal>} | {"verdict": "abort", "reason": "<text>"}
"accept" is only allowed when the report status is "pass"; a revise proposal must write a file or set a parameter."#;

#[derive(Debug, Clone)]
pub struct RemoteReasoner {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Delay before the second attempt; doubles for each later one.
    pub backoff: Duration,
}

impl RemoteReasoner {
    /// Reads the API key from [`API_KEY_ENV`].
    pub fn new(endpoint: &str, model: &str, timeout: Duration) -> Self {
        RemoteReasoner {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            timeout,
            backoff: Duration::from_millis(500),
        }
    }

    fn request(&self, prompt: &str) -> Result<String, FlowError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt},
            ],
        });
        let mut req = agent
            .post(&self.endpoint)
            .header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| FlowError::RemoteProtocol(e.to_string()))?;
        let reply: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| FlowError::RemoteProtocol(e.to_string()))?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                FlowError::RemoteProtocol("reply has no choices[0].message.content".into())
            })
    }

    /// Sends `prompt` until a reply parses and passes `check`.
    fn ask<T: DeserializeOwned>(
        &self,
        prompt: &str,
        check: impl Fn(&T) -> Result<(), FlowError>,
    ) -> Result<T, FlowError> {
        let mut last = None;
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(self.backoff * (1 << (attempt - 1)));
            }
            let parsed = self.request(prompt).and_then(|text| {
                let block = extract_fenced_block(&text)?;
                let value: T = serde_json::from_str(block)
                    .map_err(|e| FlowError::SchemaViolation(e.to_string()))?;
                check(&value)?;
                Ok(value)
            });
            match parsed {
                Ok(v) => return Ok(v),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

fn context_text(ctx: &StageContext) -> String {
    let mut s = format!(
        "Stage: {}\nGoal: {}\nIteration: {} of budget {}\nContext:\n{}\n",
        ctx.stage,
        ctx.goal,
        ctx.iteration,
        ctx.budget,
        serde_json::to_string_pretty(ctx).expect("context serializes")
    );
    for (path, content) in &ctx.contents {
        if content.len() <= INLINE_LIMIT {
            s.push_str(&format!("\n--- {path} ---\n{content}"));
        }
    }
    s
}

impl Reasoner for RemoteReasoner {
    fn propose(&mut self, ctx: &StageContext) -> Result<Proposal, FlowError> {
        let prompt = format!(
            "{}\nPropose the next action as JSON:\n{PROPOSAL_SCHEMA}\n",
            context_text(ctx)
        );
        self.ask(&prompt, Proposal::validate)
    }

    fn reflect(&mut self, ctx: &StageContext, report: &ToolReport) -> Result<Verdict, FlowError> {
        let report_json = serde_json::to_string_pretty(report).expect("report serializes");
        let prompt = format!(
            "{}\nTool report for iteration {}:\n{report_json}\n\nAnalyze the report and answer with a verdict as JSON:\n{VERDICT_SCHEMA}\n",
            context_text(ctx),
            ctx.iteration
        );
        let pass = report.is_pass();
        self.ask(&prompt, |v: &Verdict| {
            v.validate()?;
            if *v == Verdict::Accept && !pass {
                return Err(FlowError::SchemaViolation(format!(
                    "accept on a {} report",
                    report.status
                )));
            }
            Ok(())
        })
    }
}

/// Body of the single fenced block in `text`. The opening fence may carry
/// an info string (```` ```json ````).
pub fn extract_fenced_block(text: &str) -> Result<&str, FlowError> {
    let mut blocks = Vec::new();
    let mut open: Option<usize> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        if !line.trim_start().starts_with("```") {
            continue;
        }
        match open.take() {
            None => open = Some(offset),
            Some(body) if line.trim() == "```" => blocks.push(&text[body..start]),
            Some(_) => {
                return Err(FlowError::SchemaViolation(
                    "fence opened inside a fenced block".into(),
                ))
            }
        }
    }
    if open.is_some() {
        return Err(FlowError::SchemaViolation(
            "unterminated fenced block".into(),
        ));
    }
    match blocks.as_slice() {
        [one] => Ok(one),
        [] => Err(FlowError::SchemaViolation(
            "reply contains no fenced block".into(),
        )),
        _ => Err(FlowError::SchemaViolation(format!(
            "reply contains {} fenced blocks",
            blocks.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_extraction() {
        assert_eq!(
            extract_fenced_block("ok:\n```json\n{\"a\":1}\n```\n").unwrap(),
            "{\"a\":1}\n"
        );
        assert_eq!(extract_fenced_block("```\nx\n```").unwrap(), "x\n");
        assert!(extract_fenced_block("no fences").is_err());
        assert!(extract_fenced_block("```\na\n```\n```\nb\n```\n").is_err());
        assert!(extract_fenced_block("```json\n{}\n").is_err());
    }
}
