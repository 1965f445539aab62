#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Output {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({}): {}", e, String::from_utf8_lossy(&self.stdout)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs the binary inside the corpus directory, optionally pinning the
/// rayon pool size.
pub fn run(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixnewton"));
    cmd.args(args).current_dir(corpus_dir());
    match threads {
        Some(t) => cmd.env("RAYON_NUM_THREADS", t.to_string()),
        None => cmd.env_remove("RAYON_NUM_THREADS"),
    };
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Reports and diagrams whose bytes are pinned.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("faces_ex22.json", &["faces", "--poly", "ex22.mp", "--json", "-"]),
    ("faces_ex24.json", &["faces", "--poly", "ex24.mp", "--json", "-"]),
    ("plot_ex22.svg", &["plot", "--poly", "ex22.mp", "--svg", "-"]),
    ("plot_ex23.svg", &["plot", "--poly", "ex23.mp", "--svg", "-"]),
    ("nondeg_ex23.json", &["nondeg", "--poly", "ex23.mp", "--seed", "7", "--json", "-"]),
    ("tame_ex24.json", &["tame", "--poly", "ex24.mp", "--seed", "3", "--json", "-"]),
    (
        "whitney_ex51.json",
        &["probe", "whitney", "--file", "ex51.fam", "--pair", "pair51.arc.json", "--json", "-"],
    ),
    (
        "thom_ex51.json",
        &["probe", "thom", "--file", "ex51.fam", "--arc", "diag51.arc.json", "--json", "-"],
    ),
    (
        "spot_ex51.json",
        &[
            "probe", "spot", "--file", "ex51.fam", "--radius", "0.5", "--samples", "60", "--seed", "5", "--t-values",
            "0,0.5,0.9i", "--json", "-",
        ],
    ),
    (
        "family_convenient.json",
        &[
            "family", "--file", "convenient.fam", "--rings", "2", "--angles", "4", "--smoothness-samples", "40",
            "--json", "-",
        ],
    ),
];

/// Compares one golden case at the given thread count. With
/// `MIXNEWTON_BLESS=1` the file is rewritten instead.
pub fn check_golden(name: &str, args: &[&str], threads: usize) -> Result<(), String> {
    let out = run(args, Some(threads));
    if out.code != 0 {
        return Err(format!("{}: exit {} ({})", name, out.code, out.stderr.trim()));
    }
    let path = golden_dir().join(name);
    if std::env::var("MIXNEWTON_BLESS").as_deref() == Ok("1") {
        fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        fs::write(&path, &out.stdout).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = fs::read(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
    if expected != out.stdout {
        let first = expected
            .iter()
            .zip(&out.stdout)
            .position(|(a, b)| a != b)
            .unwrap_or(expected.len().min(out.stdout.len()));
        return Err(format!(
            "{} differs from the golden file at byte {} with {} threads",
            name, first, threads
        ));
    }
    Ok(())
}
