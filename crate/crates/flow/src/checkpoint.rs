// SPDX-License-Identifier: Apache-2.0
//! Checkpoints: the full [`FlowState`] bound to the config it ran under.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{FlowError, FlowState, StageStatus};

pub const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config_hash: String,
    pub state: FlowState,
}

/// Writes atomically: a crash leaves either the old or the new checkpoint.
pub fn save_checkpoint(path: &Path, config_hash: &str, state: &FlowState) -> Result<(), FlowError> {
    let cp = Checkpoint {
        schema_version: CHECKPOINT_SCHEMA,
        config_hash: config_hash.to_string(),
        state: state.clone(),
    };
    let mut text = serde_json::to_string_pretty(&cp).expect("checkpoint serializes");
    text.push('\n');
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Restores a state saved under the config whose hash is `config_hash`.
pub fn load_checkpoint(path: &Path, config_hash: &str) -> Result<FlowState, FlowError> {
    let text = std::fs::read(path)?;
    let cp: Checkpoint =
        serde_json::from_slice(&text).map_err(|e| FlowError::CheckpointCorrupt(e.to_string()))?;
    if cp.schema_version != CHECKPOINT_SCHEMA {
        return Err(FlowError::CheckpointCorrupt(format!(
            "unsupported schema version {}",
            cp.schema_version
        )));
    }
    if cp.config_hash != config_hash {
        return Err(FlowError::ConfigMismatch {
            expected: config_hash.to_string(),
            found: cp.config_hash,
        });
    }
    check_consistent(&cp.state).map_err(FlowError::CheckpointCorrupt)?;
    Ok(cp.state)
}

fn check_consistent(s: &FlowState) -> Result<(), String> {
    if let Some(c) = s.current {
        match s.stages.get(&c) {
            None => return Err(format!("current stage {c} is not configured")),
            Some(st)
                if matches!(
                    st.status,
                    StageStatus::Passed | StageStatus::Failed | StageStatus::Skipped
                ) =>
            {
                return Err(format!("current stage {c} is already final"))
            }
            Some(_) => {}
        }
    }
    for (stage, st) in &s.stages {
        if st.iterations > st.budget {
            return Err(format!(
                "{stage} ran {} iterations over a budget of {}",
                st.iterations, st.budget
            ));
        }
        let records: Vec<u32> = s
            .history
            .iter()
            .filter(|r| r.stage == *stage)
            .map(|r| r.iteration)
            .collect();
        if records.len() != st.iterations as usize
            || records.iter().enumerate().any(|(i, &it)| it as usize != i)
        {
            return Err(format!(
                "{stage} history does not match its iteration count"
            ));
        }
    }
    if let Some(r) = s.history.iter().find(|r| !s.stages.contains_key(&r.stage)) {
        return Err(format!("history names unconfigured stage {}", r.stage));
    }
    for (path, digest) in &s.artifacts {
        let Some(content) = s.objects.get(digest) else {
            return Err(format!("artifact {path} has no stored content"));
        };
        if crate::state::content_digest(content) != *digest {
            return Err(format!("artifact {path} content does not match its digest"));
        }
    }
    Ok(())
}
