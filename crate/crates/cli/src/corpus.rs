//! The example-corpus runner.
//!
//! `manifest.json` lists cases as argument vectors. Arguments starting with
//! `@` name files relative to the corpus directory. Each case runs in-process
//! and is checked against its expected exit code and, optionally, a text
//! that must appear in its output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::report::{emit, Envelope};
use crate::{CorpusArgs, EXIT_FAILED, EXIT_OK};

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub cases: Vec<Case>,
}

#[derive(Debug, Deserialize)]
pub struct Case {
    pub name: String,
    pub args: Vec<String>,
    pub expect_exit: i32,
    #[serde(default)]
    pub expect_output: Option<String>,
    #[serde(default)]
    pub slow: bool,
}

#[derive(Debug, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub args: Vec<String>,
    pub exit: i32,
    pub expect_exit: i32,
    pub output_matched: Option<bool>,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct CorpusPayload {
    pub run: usize,
    pub skipped: Vec<String>,
    pub failed: Vec<String>,
    pub cases: Vec<CaseResult>,
}

#[derive(Serialize)]
struct CorpusEcho {
    manifest: String,
    all: bool,
    filter: Option<String>,
}

pub fn load_manifest(path: &std::path::Path) -> Result<Manifest> {
    let raw = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&raw).with_context(|| format!("malformed manifest {}", path.display()))?;
    for c in &m.cases {
        if c.args.first().map(String::as_str) == Some("corpus") {
            bail!("case `{}` runs the corpus recursively", c.name);
        }
    }
    Ok(m)
}

pub fn run_corpus(a: CorpusArgs, out: &mut dyn Write) -> Result<i32> {
    let path = a.dir.join("manifest.json");
    let manifest = load_manifest(&path)?;
    let mut payload = CorpusPayload {
        run: 0,
        skipped: Vec::new(),
        failed: Vec::new(),
        cases: Vec::new(),
    };
    let mut timings = Vec::new();
    for case in manifest.cases {
        let selected = a.filter.as_ref().map_or(true, |f| case.name.contains(f.as_str()));
        if !selected || (case.slow && !a.all) {
            payload.skipped.push(case.name);
            continue;
        }
        let argv: Vec<String> = case
            .args
            .iter()
            .map(|s| match s.strip_prefix('@') {
                Some(rel) => a.dir.join(rel).display().to_string(),
                None => s.clone(),
            })
            .collect();
        let mut buf = Vec::new();
        let start = Instant::now();
        let exit = crate::run(std::iter::once("mixnewton".to_string()).chain(argv), &mut buf);
        timings.push(start.elapsed());
        let output_matched = case
            .expect_output
            .as_ref()
            .map(|t| String::from_utf8_lossy(&buf).contains(t.as_str()));
        let ok = exit == case.expect_exit && output_matched != Some(false);
        if !ok {
            payload.failed.push(case.name.clone());
        }
        payload.run += 1;
        payload.cases.push(CaseResult {
            name: case.name,
            args: case.args,
            exit,
            expect_exit: case.expect_exit,
            output_matched,
            ok,
        });
    }
    let passes = payload.failed.is_empty();
    let env = Envelope::new(
        "corpus",
        CorpusEcho {
            manifest: "manifest.json".into(),
            all: a.all,
            filter: a.filter.clone(),
        },
        payload,
    );
    emit(
        &env,
        a.out.json.as_deref(),
        || {
            let mut s = String::new();
            for (c, t) in env.payload.cases.iter().zip(&timings) {
                let _ = writeln!(
                    s,
                    "{:<4} {:<32} exit {} (expected {})  {:.1}s",
                    if c.ok { "ok" } else { "FAIL" },
                    c.name,
                    c.exit,
                    c.expect_exit,
                    t.as_secs_f64()
                );
            }
            let _ = writeln!(
                s,
                "{} run, {} failed, {} skipped",
                env.payload.run,
                env.payload.failed.len(),
                env.payload.skipped.len()
            );
            s
        },
        out,
    )?;
    Ok(if passes { EXIT_OK } else { EXIT_FAILED })
}
