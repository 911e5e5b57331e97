//! Generates the synthetic corpus and runs every stage on it.
//!
//! `cargo run --example end_to_end -- <dir>` (defaults to a temp dir).

use std::path::PathBuf;

use tsbench::pipeline::{self, RunConfig};
use tsbench::synthetic::write_synthetic;

fn main() -> tsbench::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tsbench-end-to-end"));
    let files = write_synthetic(&dir, 7)?;
    let cfg = RunConfig {
        corpus: Some(files.manifest),
        decisions: Some(files.decisions),
        forecasts: files.forecasts,
        ..RunConfig::new(dir.join("out"))
    };
    for stage in pipeline::run_all(&cfg)? {
        println!("{:<12} {} files", stage.stage, stage.written.len());
    }
    let task = std::fs::read_to_string(cfg.artifact("leaderboards/task.json")).expect("task leaderboard");
    println!("{task}");
    Ok(())
}
