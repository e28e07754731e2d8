//! Evaluator wire protocol v1: newline-delimited JSON over a child
//! process's stdin/stdout.
//!
//! ```text
//! child  -> {"op":"hello","protocol":1,"name":"..."}
//! parent -> {"id":7,"op":"evaluate","subset":[0,3],"warm_key":null,"train":"a.sft","valid":"b.sft"}
//! child  -> {"id":7,"fitness":0.75,"state_key":"abc","error":null}
//! parent -> {"op":"bye"}
//! ```
//!
//! Any other line on the child's stdout is a protocol violation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("plugin exited: {0}")]
    ChildExited(String),
    #[error("timed out after {0:?} waiting for {1}")]
    Timeout(std::time::Duration, &'static str),
    #[error("plugin reported fitness {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("plugin reported error: {0}")]
    PluginError(String),
    #[error("failed to launch plugin: {0}")]
    Spawn(String),
    #[error("plugin I/O: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub op: String,
    pub protocol: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub id: u64,
    pub op: String,
    pub subset: Vec<usize>,
    pub warm_key: Option<String>,
    pub train: PathBuf,
    pub valid: PathBuf,
}

impl EvaluateRequest {
    pub fn new(
        id: u64,
        subset: Vec<usize>,
        warm_key: Option<String>,
        train: PathBuf,
        valid: PathBuf,
    ) -> Self {
        Self {
            id,
            op: "evaluate".into(),
            subset,
            warm_key,
            train,
            valid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateResponse {
    pub id: u64,
    #[serde(default)]
    pub fitness: Option<f64>,
    #[serde(default)]
    pub state_key: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Parent-to-child control messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Control {
    Bye,
}

/// A successful, range-checked response.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub id: u64,
    pub fitness: f64,
    pub state_key: Option<String>,
}

fn violation(line: &str, why: impl std::fmt::Display) -> ProtocolError {
    let mut shown: String = line.chars().take(120).collect();
    if shown.len() < line.len() {
        shown.push_str("...");
    }
    ProtocolError::ProtocolViolation(format!("{why}: {shown:?}"))
}

/// Parses the child's first line.
pub fn parse_hello(line: &str) -> Result<Hello, ProtocolError> {
    let hello: Hello = serde_json::from_str(line.trim_end()).map_err(|e| violation(line, e))?;
    if hello.op != "hello" {
        return Err(violation(line, "expected hello"));
    }
    if hello.protocol != PROTOCOL_VERSION {
        return Err(violation(
            line,
            format!("unsupported protocol {}", hello.protocol),
        ));
    }
    Ok(hello)
}

/// Parses one response line and checks it against the expected id.
pub fn parse_response(line: &str, expected_id: u64) -> Result<Evaluated, ProtocolError> {
    let resp: EvaluateResponse =
        serde_json::from_str(line.trim_end()).map_err(|e| violation(line, e))?;
    if resp.id != expected_id {
        return Err(violation(
            line,
            format!(
                "response id {} does not match request id {expected_id}",
                resp.id
            ),
        ));
    }
    if let Some(err) = resp.error {
        return Err(ProtocolError::PluginError(err));
    }
    let fitness = resp
        .fitness
        .ok_or_else(|| violation(line, "response has neither fitness nor error"))?;
    if !(0.0..=1.0).contains(&fitness) {
        return Err(ProtocolError::ScoreOutOfRange(fitness));
    }
    Ok(Evaluated {
        id: resp.id,
        fitness,
        state_key: resp.state_key,
    })
}

/// Serializes a message as one line, newline included.
pub fn encode_line<T: Serialize>(msg: &T) -> String {
    let mut s = serde_json::to_string(msg).expect("protocol messages always serialize");
    s.push('\n');
    s
}
