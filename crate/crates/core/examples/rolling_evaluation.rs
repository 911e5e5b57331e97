//! Rolling-window scoring, S-Naive normalization and leaderboards on the
//! synthetic corpus, without touching the disk pipeline.

use tsbench::corpus::enumerate_windows;
use tsbench::evaluation::{score_all, task_leaderboard, variate_leaderboard};
use tsbench::synthetic::{finalize_in_memory, noisy_oracle, synthetic_corpus, synthetic_decisions};

fn main() -> tsbench::Result<()> {
    let corpus = finalize_in_memory(&synthetic_corpus(7), &synthetic_decisions())?;
    for ds in &corpus {
        for h in &ds.horizons {
            let w = enumerate_windows(ds, h.length)?;
            println!("{}/{}: H={} -> {} windows", ds.dataset_id, h.label, h.length, w.len());
        }
    }
    let model = noisy_oracle(&corpus, 3)?;
    let table = score_all(&[&model], &corpus)?;
    println!("{} scored windows", table.rows.len());
    print!("{}", task_leaderboard(&table).to_json());
    let lb = variate_leaderboard(&table);
    for e in &lb.entries {
        println!("variate level: {} mase {:?} crps {:?}", e.model, e.mase_norm, e.crps_norm);
    }
    Ok(())
}
