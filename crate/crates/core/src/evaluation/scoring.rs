//! Window-level scoring of forecast archives against the corpus truth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{expected_keys, ForecastArchive, ForecastKey, SEASONAL_NAIVE};
use crate::corpus::DatasetSpec;
use crate::error::{Error, Result};
use crate::metrics::{score_window, seasonal_naive, SeasonalNaive, WindowScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub model: String,
    #[serde(flatten)]
    pub key: ForecastKey,
    #[serde(flatten)]
    pub score: WindowScore,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn models(&self) -> Vec<&str> {
        let mut m: Vec<&str> = self.rows.iter().map(|r| r.model.as_str()).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("model,dataset,horizon,series,window,variate,mase,crps,mase_denominator,diagnostics\n");
        for r in &self.rows {
            let k = &r.key;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.model,
                k.dataset,
                k.horizon,
                k.series,
                k.window,
                k.variate,
                opt(r.score.mase),
                opt(r.score.crps),
                match r.score.mase_denominator {
                    crate::metrics::MaseDenominator::InWindow => "in_window",
                    crate::metrics::MaseDenominator::ContextLookback => "context_lookback",
                },
                r.score.diagnostics.join(";"),
            ));
        }
        out
    }
}

/// Truth window and everything before it for one key, plus the seasonal
/// period of the dataset.
pub struct WindowData<'a> {
    pub truth: &'a [f64],
    pub context: &'a [f64],
    pub period: usize,
    /// Index of the first test point.
    pub test_start: usize,
    /// Index of the first point of the window.
    pub window_start: usize,
}

pub fn window_data<'a>(corpus: &'a [DatasetSpec], key: &ForecastKey) -> Result<WindowData<'a>> {
    let ds = corpus
        .iter()
        .find(|d| d.dataset_id == key.dataset)
        .ok_or_else(|| Error::UnknownId(format!("dataset `{}`", key.dataset)))?;
    let h = ds
        .horizon(&key.horizon)
        .ok_or_else(|| Error::UnknownId(format!("horizon `{}/{}`", key.dataset, key.horizon)))?
        .length;
    let series = ds
        .series(&key.series)
        .ok_or_else(|| Error::UnknownId(format!("series `{}/{}`", key.dataset, key.series)))?;
    let v = series
        .variate(&key.variate)
        .ok_or_else(|| Error::UnknownId(format!("variate `{}/{}/{}`", key.dataset, key.series, key.variate)))?;
    let windows = crate::corpus::window_count(ds.test_length, h)?;
    if key.window == 0 || key.window > windows {
        return Err(Error::UnknownId(format!("window {} of {}/{}", key.window, key.dataset, key.horizon)));
    }
    let test_start = ds.test_start(series);
    let window_start = test_start + (key.window - 1) * h;
    Ok(WindowData {
        truth: &v.values[window_start..window_start + h],
        context: &v.values[..window_start],
        period: ds.freq.seasonal_period,
        test_start,
        window_start,
    })
}

/// Seasonal Naive forecast for one key, using all history before the window.
pub fn seasonal_naive_for(corpus: &[DatasetSpec], key: &ForecastKey) -> Result<SeasonalNaive> {
    let w = window_data(corpus, key)?;
    seasonal_naive(w.context, w.period, w.truth.len())
}

/// The baseline archive covering every key of the corpus.
pub fn seasonal_naive_archive(corpus: &[DatasetSpec]) -> Result<ForecastArchive> {
    let keys = expected_keys(corpus)?;
    let forecasts = keys
        .into_par_iter()
        .map(|k| seasonal_naive_for(corpus, &k).map(|f| (k, f.forecast)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForecastArchive {
        model: SEASONAL_NAIVE.to_string(),
        forecasts: forecasts.into_iter().collect(),
        incomplete: Vec::new(),
    })
}

/// Scores every forecast in `archive`, in key order.
pub fn score_archive(archive: &ForecastArchive, corpus: &[DatasetSpec]) -> Result<Vec<ScoreRow>> {
    let entries: Vec<(&ForecastKey, _)> = archive.forecasts.iter().collect();
    entries
        .into_par_iter()
        .map(|(key, qf)| {
            let w = window_data(corpus, key)?;
            if w.context.iter().chain(w.truth).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{key}: history contains missing values; evaluate a finalized corpus"
                )));
            }
            if qf.horizon() != w.truth.len() {
                return Err(Error::Archive(format!(
                    "{key}: forecast has {} steps, task horizon is {}",
                    qf.horizon(),
                    w.truth.len()
                )));
            }
            let mut score = score_window(w.truth, qf, w.period, w.context);
            if archive.model == SEASONAL_NAIVE && w.context.len() < w.period {
                score.diagnostics.push("seasonal naive fell back to last value".into());
            }
            Ok(ScoreRow {
                model: archive.model.clone(),
                key: key.clone(),
                score,
            })
        })
        .collect()
}

/// Scores the baseline and every archive; rows ordered by model then key.
pub fn score_all(archives: &[&ForecastArchive], corpus: &[DatasetSpec]) -> Result<ScoreTable> {
    let baseline = seasonal_naive_archive(corpus)?;
    let mut rows = score_archive(&baseline, corpus)?;
    for a in archives {
        rows.extend(score_archive(a, corpus)?);
    }
    rows.sort_by(|a, b| (&a.model, &a.key).cmp(&(&b.model, &b.key)));
    Ok(ScoreTable { rows })
}
