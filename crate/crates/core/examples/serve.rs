//! Runs the pipeline on the synthetic corpus and serves the artifacts on
//! 127.0.0.1:8080. Try `curl 'localhost:8080/leaderboard?mask=F3&bits=1'`.

use tsbench::pipeline::{run_all, RunConfig};
use tsbench::synthetic::write_synthetic;

#[tokio::main]
async fn main() -> tsbench::Result<()> {
    let dir = std::env::temp_dir().join("tsbench-serve");
    let files = write_synthetic(&dir, 7)?;
    let cfg = RunConfig {
        corpus: Some(files.manifest),
        decisions: Some(files.decisions),
        forecasts: files.forecasts,
        port: Some(8080),
        ..RunConfig::new(dir.join("out"))
    };
    run_all(&cfg)?;
    println!("serving {} on 127.0.0.1:8080", cfg.out.display());
    tsbench::server::serve(&cfg).await
}
