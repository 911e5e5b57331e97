use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsbench::pipeline::{self, LeaderboardRequest, RunConfig, StageOutput};
use tsbench::Error;

#[derive(Parser)]
#[command(name = "tsbench", version, about = "Forecasting benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory holding all stage artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Corpus manifest (defaults to the one recorded by `validate`).
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load the corpus and write corpus_summary.json.
    Validate(Common),
    /// Run the quality checks and write quality_report.json.
    Screen {
        #[command(flatten)]
        common: Common,
        /// Screening thresholds as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Apply curator decisions and write the finalized corpus.
    Finalize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
    /// Extract structural features from the finalized corpus.
    Features(Common),
    /// Encode pattern codes against population medians.
    Encode(Common),
    /// Score forecast archives against the finalized corpus.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        forecasts: Vec<PathBuf>,
    },
    /// Build leaderboards from scores and pattern codes.
    Leaderboard {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        dataset: Option<String>,
        /// Pattern mask: `--1----` or `F3,F7`.
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        bits: Option<String>,
    },
    /// Serve the artifacts over HTTP.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn config(common: Common) -> RunConfig {
    RunConfig {
        corpus: common.corpus,
        out: common.out,
        ..Default::default()
    }
}

fn run(cmd: Command) -> tsbench::Result<Option<StageOutput>> {
    let out = match cmd {
        Command::Validate(c) => pipeline::validate(&config(c))?,
        Command::Screen { common, config: sc } => pipeline::screen(&RunConfig {
            config: sc,
            ..config(common)
        })?,
        Command::Finalize { common, decisions } => pipeline::finalize(&RunConfig {
            decisions,
            ..config(common)
        })?,
        Command::Features(c) => pipeline::features(&config(c))?,
        Command::Encode(c) => pipeline::encode(&config(c))?,
        Command::Evaluate { common, forecasts } => pipeline::evaluate(&RunConfig {
            forecasts,
            ..config(common)
        })?,
        Command::Leaderboard {
            common,
            level,
            dataset,
            mask,
            bits,
        } => {
            let req = LeaderboardRequest {
                level,
                dataset,
                mask,
                bits,
            };
            let extra = (req != LeaderboardRequest::default()).then_some(&req);
            pipeline::leaderboard(&config(common), extra)?
        }
        Command::Serve { common, port } => {
            let cfg = RunConfig {
                port: Some(port),
                ..config(common)
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            rt.block_on(tsbench::server::serve(&cfg))?;
            return Ok(None);
        }
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Some(out)) => {
            println!("{}", serde_json::to_string_pretty(&out).expect("stage output serializes"));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}
