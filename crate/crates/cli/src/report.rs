//! The versioned JSON envelope shared by all subcommands.

use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields serialize in declaration order.
#[derive(Debug, Serialize)]
pub struct Envelope<I: Serialize, P: Serialize> {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub input: I,
    pub payload: P,
    pub warnings: Vec<String>,
}

impl<I: Serialize, P: Serialize> Envelope<I, P> {
    pub fn new(command: &'static str, input: I, payload: P) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            command,
            input,
            payload,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `target`, where `-` means `out`.
pub fn write_target(target: &str, text: &str, out: &mut dyn Write) -> Result<()> {
    if target == "-" {
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        fs::write(target, text).with_context(|| format!("cannot write {}", target))?;
    }
    Ok(())
}

/// Emits the envelope as JSON when requested, otherwise the text summary
/// followed by any warnings.
pub fn emit<I: Serialize, P: Serialize>(
    env: &Envelope<I, P>,
    json: Option<&str>,
    summary: impl FnOnce() -> String,
    out: &mut dyn Write,
) -> Result<()> {
    match json {
        Some(target) => write_target(target, &env.to_json()?, out),
        None => {
            let mut text = summary();
            for w in &env.warnings {
                text.push_str(&format!("warning: {}\n", w));
            }
            write_target("-", &text, out)
        }
    }
}
