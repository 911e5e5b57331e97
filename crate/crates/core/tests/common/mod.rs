#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn synthetic_manifest() -> PathBuf {
    fixture("synthetic/corpus/manifest.json")
}

pub fn synthetic_decisions() -> PathBuf {
    fixture("synthetic/decisions.json")
}

pub fn synthetic_forecasts() -> Vec<PathBuf> {
    ["snaive-replay.csv", "noisy-oracle.csv"]
        .iter()
        .map(|f| fixture(&format!("synthetic/forecasts/{f}")))
        .collect()
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsbench"))
        .args(args)
        .output()
        .expect("spawn tsbench")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Runs the full CLI sequence on the bundled synthetic corpus into `out`.
/// Returns the first failing stage's output, if any.
pub fn run_cli_sequence(out: &Path) -> Result<(), String> {
    let out_s = path_str(out);
    let manifest = synthetic_manifest();
    let decisions = synthetic_decisions();
    let forecasts = synthetic_forecasts();
    let mut steps: Vec<Vec<&str>> = vec![
        vec!["validate", "--corpus", path_str(&manifest), "--out", out_s],
        vec!["screen", "--out", out_s],
        vec!["finalize", "--decisions", path_str(&decisions), "--out", out_s],
        vec!["features", "--out", out_s],
        vec!["encode", "--out", out_s],
    ];
    let mut eval = vec!["evaluate", "--out", out_s];
    for f in &forecasts {
        eval.extend(["--forecasts", path_str(f)]);
    }
    steps.push(eval);
    steps.push(vec!["leaderboard", "--out", out_s]);
    for args in steps {
        let o = cli(&args);
        if !o.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr)));
        }
    }
    Ok(())
}

/// Relative paths of every file below `root`, sorted.
pub fn files_below(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("read dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
