//! Deterministic synthetic corpus and forecast archives.
//!
//! The corpus has three datasets at hourly, daily and monthly frequency. Two
//! items are planted for screening to catch: a constant `promo` variate in
//! `retail` and a series `macro/region4` that duplicates `macro/region1`. The bundled
//! decisions file drops both.
//!
//! Two models are provided: `snaive-replay` repeats the Seasonal Naive
//! baseline and `noisy-oracle` centres Gaussian quantiles on the truth plus
//! noise whose scale is three times the mean absolute seasonal difference of
//! the window context.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::{DatasetSpec, FrequencyCode, FrequencySpec, Horizon, SeriesRecord, Variate};
use crate::error::{Error, Result};
use crate::evaluation::{expected_keys, seasonal_naive_for, window_data, write_forecasts_csv, ForecastArchive};
use crate::metrics::{QuantileForecast, QUANTILE_LEVELS};
use crate::pipeline::write_json;
use crate::screening::{
    apply_decisions, run_screening, Decision, DecisionAction, DecisionSet, DecisionTarget, ScreeningConfig,
};

pub const SNAIVE_REPLAY: &str = "snaive-replay";
pub const NOISY_ORACLE: &str = "noisy-oracle";
pub const NOISE_FACTOR: f64 = 3.0;

/// Paths written by [`write_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFiles {
    pub manifest: PathBuf,
    pub decisions: PathBuf,
    pub forecasts: Vec<PathBuf>,
}

fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

/// Trend + seasonal + AR(1) noise.
fn structured(rng: &mut ChaCha8Rng, len: usize, period: usize, level: f64, slope: f64, amp: f64, noise: f64) -> Vec<f64> {
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let mut ar = 0.0;
    (0..len)
        .map(|t| {
            ar = 0.6 * ar + noise * rng.sample::<f64, _>(StandardNormal);
            let season = (std::f64::consts::TAU * t as f64 / period as f64 + phase).sin();
            level + slope * t as f64 + amp * season + ar
        })
        .collect()
}

fn series(id: &str, freq: FrequencySpec, variates: Vec<Variate>) -> SeriesRecord {
    SeriesRecord {
        series_id: id.to_string(),
        start: start(),
        freq,
        variates,
        collisions: Vec::new(),
    }
}

fn horizons(spec: &[(&str, usize)]) -> Vec<Horizon> {
    spec.iter()
        .map(|(label, length)| Horizon {
            label: label.to_string(),
            length: *length,
        })
        .collect()
}

/// Builds the raw synthetic corpus from `seed`.
pub fn synthetic_corpus(seed: u64) -> Vec<DatasetSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let hourly = FrequencySpec::new(FrequencyCode::Hourly);
    let energy: Vec<SeriesRecord> = (1..=2)
        .map(|i| {
            let load = structured(&mut rng, 1200, 24, 50.0 * i as f64, 0.01, 10.0, 1.5);
            let temp = structured(&mut rng, 1200, 24, 15.0, -0.002, 4.0, 0.8);
            series(
                &format!("s{i}"),
                hourly,
                vec![Variate::from_values("load", load), Variate::from_values("temp", temp)],
            )
        })
        .collect();

    let daily = FrequencySpec::new(FrequencyCode::Daily);
    let retail = (1..=4)
        .map(|i| {
            let sales = structured(&mut rng, 400, 7, 100.0 + 20.0 * i as f64, 0.05 * i as f64, 12.0, 4.0);
            series(
                &format!("store{i}"),
                daily,
                vec![
                    Variate::from_values("sales", sales),
                    Variate::from_values("promo", vec![1.0; 400]),
                ],
            )
        })
        .collect();

    let monthly = FrequencySpec::new(FrequencyCode::Monthly);
    let mut macro_: Vec<SeriesRecord> = (1..=3)
        .map(|i| {
            let index = structured(&mut rng, 120, 12, 200.0, 0.4 * i as f64, 6.0, 2.0);
            series(&format!("region{i}"), monthly, vec![Variate::from_values("index", index)])
        })
        .collect();
    let mut dup = macro_[0].clone();
    dup.series_id = "region4".into();
    macro_.push(dup);

    vec![
        DatasetSpec {
            dataset_id: "energy".into(),
            domain: "energy".into(),
            freq: hourly,
            series: energy,
            test_length: 192,
            horizons: horizons(&[("short", 24), ("long", 96)]),
        },
        DatasetSpec {
            dataset_id: "retail".into(),
            domain: "sales".into(),
            freq: daily,
            series: retail,
            test_length: 56,
            horizons: horizons(&[("short", 7), ("medium", 28)]),
        },
        DatasetSpec {
            dataset_id: "macro".into(),
            domain: "econ".into(),
            freq: monthly,
            series: macro_,
            test_length: 24,
            horizons: horizons(&[("short", 6), ("long", 12)]),
        },
    ]
}

/// Drops the planted constant variate and duplicated series.
pub fn synthetic_decisions() -> DecisionSet {
    DecisionSet {
        decisions: vec![
            Decision {
                target: DecisionTarget::Variate,
                id: "retail/promo".into(),
                action: DecisionAction::Drop,
                trim_span: None,
            },
            Decision {
                target: DecisionTarget::Series,
                id: "macro/region4".into(),
                action: DecisionAction::Drop,
                trim_span: None,
            },
        ],
    }
}

/// Screens `corpus` with the default configuration and applies `decisions`,
/// as the `screen` and `finalize` stages would.
pub fn finalize_in_memory(corpus: &[DatasetSpec], decisions: &DecisionSet) -> Result<Vec<DatasetSpec>> {
    let cfg = ScreeningConfig::default();
    corpus
        .iter()
        .map(|d| apply_decisions(d, &run_screening(d, &cfg), decisions).map(|f| f.dataset))
        .collect()
}

/// Seasonal Naive forecasts under another model name.
pub fn snaive_replay(finalized: &[DatasetSpec]) -> Result<ForecastArchive> {
    let mut archive = ForecastArchive {
        model: SNAIVE_REPLAY.into(),
        ..Default::default()
    };
    for key in expected_keys(finalized)? {
        let f = seasonal_naive_for(finalized, &key)?.forecast;
        archive.forecasts.insert(key, f);
    }
    Ok(archive)
}

/// Truth plus Gaussian noise, with Gaussian quantiles of the same scale.
pub fn noisy_oracle(finalized: &[DatasetSpec], seed: u64) -> Result<ForecastArchive> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::standard();
    let z: Vec<f64> = QUANTILE_LEVELS.iter().map(|p| std_normal.inverse_cdf(*p)).collect();
    let mut archive = ForecastArchive {
        model: NOISY_ORACLE.into(),
        ..Default::default()
    };
    for key in expected_keys(finalized)? {
        let w = window_data(finalized, &key)?;
        let s = w.period.min(w.context.len() - 1).max(1);
        let diffs: Vec<f64> = w.context.windows(s + 1).map(|p| (p[s] - p[0]).abs()).collect();
        let scale = NOISE_FACTOR * crate::stats::mean(&diffs).max(1e-6);
        let values = w
            .truth
            .iter()
            .map(|y| {
                let centre = y + scale * rng.sample::<f64, _>(StandardNormal);
                std::array::from_fn(|k| centre + scale * z[k])
            })
            .collect();
        archive.forecasts.insert(key, QuantileForecast::new(values)?);
    }
    Ok(archive)
}

/// Writes the raw corpus, decisions and both forecast archives under `dir`:
/// `corpus/manifest.json`, `decisions.json` and `forecasts/<model>.csv`.
pub fn write_synthetic(dir: &Path, seed: u64) -> Result<SyntheticFiles> {
    let corpus = synthetic_corpus(seed);
    let corpus_dir = dir.join("corpus");
    if corpus_dir.exists() {
        fs::remove_dir_all(&corpus_dir).map_err(|e| Error::io(&corpus_dir, e))?;
    }
    let manifest = crate::corpus::write_corpus(&corpus, &corpus_dir)?;
    let decisions = synthetic_decisions();
    let decisions_path = dir.join("decisions.json");
    write_json(&decisions_path, &decisions)?;

    // Forecasts are generated from the corpus as it will be after a reload,
    // so replayed baselines match the pipeline's own baseline exactly.
    let reloaded = crate::corpus::load_corpus(&manifest)?;
    let finalized = finalize_in_memory(&reloaded, &decisions)?;
    let fc_dir = dir.join("forecasts");
    fs::create_dir_all(&fc_dir).map_err(|e| Error::io(&fc_dir, e))?;
    let mut forecasts = Vec::new();
    for archive in [snaive_replay(&finalized)?, noisy_oracle(&finalized, seed ^ 0x5eed)?] {
        let path = fc_dir.join(format!("{}.csv", archive.model));
        write_forecasts_csv(&[&archive], &path)?;
        forecasts.push(path);
    }
    Ok(SyntheticFiles {
        manifest,
        decisions: decisions_path,
        forecasts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = synthetic_corpus(7);
        assert_eq!(a, synthetic_corpus(7));
        for d in &a {
            d.validate().unwrap();
        }
        assert_ne!(a, synthetic_corpus(8));
    }

    #[test]
    fn screening_flags_planted_items() {
        let corpus = synthetic_corpus(7);
        let report = run_screening(&corpus[1], &ScreeningConfig::default());
        let flagged = report.unpredictable();
        assert!(flagged.iter().any(|(_, v)| *v == "promo"), "{flagged:?}");
        let macro_ = run_screening(&corpus[2], &ScreeningConfig::default());
        assert!(!macro_.cross_series.unwrap().flagged.is_empty());
    }

    #[test]
    fn decisions_remove_planted_items() {
        let corpus = synthetic_corpus(7);
        let fin = finalize_in_memory(&corpus, &synthetic_decisions()).unwrap();
        assert!(fin[2].series("region4").is_none());
        assert_eq!(fin[1].variate_names(), vec!["sales"]);
    }
}
