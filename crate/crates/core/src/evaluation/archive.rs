//! Forecast archive ingestion and coverage.
//!
//! Wide format: `model,dataset,horizon,series,window,variate,step,q10,...,q90`.
//! Sample format: `model,dataset,horizon,series,window,variate,step,sample_index,value`.
//! Windows and steps are 1-based.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{window_count, DatasetSpec};
use crate::error::{Error, Result};
use crate::metrics::{monotonicity_violation, samples_to_quantiles, QuantileForecast};

/// Model name under which the generated Seasonal Naive baseline is scored.
pub const SEASONAL_NAIVE: &str = "seasonal_naive";

const KEY_COLUMNS: [&str; 7] = ["model", "dataset", "horizon", "series", "window", "variate", "step"];
const QUANTILE_COLUMNS: [&str; 9] = ["q10", "q20", "q30", "q40", "q50", "q60", "q70", "q80", "q90"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ForecastKey {
    pub dataset: String,
    pub horizon: String,
    pub series: String,
    pub window: usize,
    pub variate: String,
}

impl fmt::Display for ForecastKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}/{}", self.dataset, self.horizon, self.series, self.window, self.variate)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForecastArchive {
    pub model: String,
    pub forecasts: BTreeMap<ForecastKey, QuantileForecast>,
    /// Keys that lost at least one step to a rejected row.
    pub incomplete: Vec<ForecastKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub file: String,
    pub line: usize,
    pub model: String,
    pub key: String,
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub archives: BTreeMap<String, ForecastArchive>,
    pub rejected: Vec<RejectedRow>,
    pub rows_read: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub model: String,
    pub expected: usize,
    pub covered: usize,
    pub missing: Vec<ForecastKey>,
    pub incomplete: Vec<ForecastKey>,
    pub rejected_rows: usize,
    pub summary: String,
}

/// Horizon length of a validated key's task.
struct KeyIndex<'a> {
    corpus: &'a [DatasetSpec],
}

impl KeyIndex<'_> {
    /// Resolves ids against the corpus and returns the horizon length.
    fn horizon_of(&self, key: &ForecastKey) -> Result<usize> {
        let ds = self
            .corpus
            .iter()
            .find(|d| d.dataset_id == key.dataset)
            .ok_or_else(|| Error::UnknownId(format!("dataset `{}`", key.dataset)))?;
        let h = ds
            .horizon(&key.horizon)
            .ok_or_else(|| Error::UnknownId(format!("horizon `{}` of dataset `{}`", key.horizon, key.dataset)))?;
        let series = ds
            .series(&key.series)
            .ok_or_else(|| Error::UnknownId(format!("series `{}/{}`", key.dataset, key.series)))?;
        if series.variate(&key.variate).is_none() {
            return Err(Error::UnknownId(format!("variate `{}/{}/{}`", key.dataset, key.series, key.variate)));
        }
        let windows = window_count(ds.test_length, h.length)?;
        if key.window == 0 || key.window > windows {
            return Err(Error::UnknownId(format!("window {} of task {}/{} (has {windows})", key.window, key.dataset, key.horizon)));
        }
        Ok(h.length)
    }
}

/// Every `(dataset, horizon, series, window, variate)` the corpus requires.
pub fn expected_keys(corpus: &[DatasetSpec]) -> Result<Vec<ForecastKey>> {
    let mut keys = Vec::new();
    for ds in corpus {
        for h in &ds.horizons {
            let windows = window_count(ds.test_length, h.length)?;
            for s in &ds.series {
                for w in 1..=windows {
                    for v in &s.variates {
                        keys.push(ForecastKey {
                            dataset: ds.dataset_id.clone(),
                            horizon: h.label.clone(),
                            series: s.series_id.clone(),
                            window: w,
                            variate: v.name.clone(),
                        });
                    }
                }
            }
        }
    }
    keys.sort();
    Ok(keys)
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize) -> &'r str {
    rec.get(idx).unwrap_or("").trim()
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, file: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Archive(format!("{file}:{line}: cannot parse {what} `{s}`")))
}

enum Layout {
    Wide([usize; 9]),
    Samples { sample_index: usize, value: usize },
}

/// Reads one or more forecast CSV files (either layout) and validates them
/// against the corpus. Non-monotone rows are rejected and reported; unknown
/// ids, malformed cells, duplicate rows and step counts that disagree with
/// the task horizon are errors.
pub fn ingest_forecasts<P: AsRef<Path>>(paths: &[P], corpus: &[DatasetSpec]) -> Result<IngestOutcome> {
    let index = KeyIndex { corpus };
    let mut outcome = IngestOutcome::default();
    // model -> key -> per-step slot (None = not seen, Some(None) = rejected)
    let mut steps: BTreeMap<String, BTreeMap<ForecastKey, Vec<Option<Option<[f64; 9]>>>>> = BTreeMap::new();
    let mut samples: BTreeMap<String, BTreeMap<ForecastKey, Vec<BTreeMap<usize, f64>>>> = BTreeMap::new();

    for path in paths {
        let path = path.as_ref();
        let file = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        let col = |name: &str| header.iter().position(|h| h == name);
        let mut key_idx = [0usize; 7];
        for (slot, name) in key_idx.iter_mut().zip(KEY_COLUMNS) {
            *slot = col(name).ok_or_else(|| Error::Archive(format!("{file}: missing column `{name}`")))?;
        }
        let layout = if let (Some(si), Some(v)) = (col("sample_index"), col("value")) {
            Layout::Samples { sample_index: si, value: v }
        } else {
            let mut q = [0usize; 9];
            for (slot, name) in q.iter_mut().zip(QUANTILE_COLUMNS) {
                *slot = col(name).ok_or_else(|| {
                    Error::Archive(format!("{file}: expected quantile columns q10..q90 or sample_index,value; missing `{name}`"))
                })?;
            }
            Layout::Wide(q)
        };

        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            outcome.rows_read += 1;
            let model = field(&rec, key_idx[0]).to_string();
            if model.is_empty() {
                return Err(Error::Archive(format!("{file}:{line}: empty model name")));
            }
            if model == SEASONAL_NAIVE {
                return Err(Error::Archive(format!("{file}:{line}: model name `{SEASONAL_NAIVE}` is reserved for the baseline")));
            }
            let key = ForecastKey {
                dataset: field(&rec, key_idx[1]).to_string(),
                horizon: field(&rec, key_idx[2]).to_string(),
                series: field(&rec, key_idx[3]).to_string(),
                window: parse_num(field(&rec, key_idx[4]), "window", &file, line)?,
                variate: field(&rec, key_idx[5]).to_string(),
            };
            let step: usize = parse_num(field(&rec, key_idx[6]), "step", &file, line)?;
            let h = index
                .horizon_of(&key)
                .map_err(|e| match e {
                    Error::UnknownId(m) => Error::UnknownId(format!("{m} ({file}:{line})")),
                    other => other,
                })?;
            if step == 0 || step > h {
                return Err(Error::Archive(format!(
                    "{file}:{line}: step {step} outside 1..={h} for task {}/{} (wrong H)",
                    key.dataset, key.horizon
                )));
            }

            match &layout {
                Layout::Wide(q_idx) => {
                    let mut q = [0.0; 9];
                    for (k, &ci) in q_idx.iter().enumerate() {
                        q[k] = parse_num(field(&rec, ci), QUANTILE_COLUMNS[k], &file, line)?;
                    }
                    let slots = steps
                        .entry(model.clone())
                        .or_default()
                        .entry(key.clone())
                        .or_insert_with(|| vec![None; h]);
                    if slots[step - 1].is_some() {
                        return Err(Error::Archive(format!("{file}:{line}: duplicate row for {model} {key} step {step}")));
                    }
                    if let Some(level) = monotonicity_violation(&q) {
                        outcome.rejected.push(RejectedRow {
                            file: file.clone(),
                            line,
                            model: model.clone(),
                            key: key.to_string(),
                            step,
                            reason: format!("quantiles not monotone at level {level}"),
                        });
                        slots[step - 1] = Some(None);
                    } else {
                        slots[step - 1] = Some(Some(q));
                    }
                }
                Layout::Samples { sample_index, value } => {
                    let si: usize = parse_num(field(&rec, *sample_index), "sample_index", &file, line)?;
                    let v: f64 = parse_num(field(&rec, *value), "value", &file, line)?;
                    let per_step = samples
                        .entry(model.clone())
                        .or_default()
                        .entry(key.clone())
                        .or_insert_with(|| vec![BTreeMap::new(); h]);
                    if per_step[step - 1].insert(si, v).is_some() {
                        return Err(Error::Archive(format!(
                            "{file}:{line}: duplicate sample {si} for {model} {key} step {step}"
                        )));
                    }
                }
            }
        }
    }

    for (model, keys) in steps {
        let archive = outcome.archives.entry(model.clone()).or_insert_with(|| ForecastArchive {
            model: model.clone(),
            ..Default::default()
        });
        for (key, slots) in keys {
            if slots.iter().any(|s| matches!(s, Some(None))) {
                archive.incomplete.push(key);
                continue;
            }
            if let Some(missing) = slots.iter().position(Option::is_none) {
                return Err(Error::Archive(format!(
                    "{model} {key}: {} of {} steps present, step {} missing (wrong H)",
                    slots.iter().filter(|s| s.is_some()).count(),
                    slots.len(),
                    missing + 1
                )));
            }
            let values = slots.into_iter().map(|s| s.flatten().expect("checked")).collect();
            archive.forecasts.insert(key, QuantileForecast { values });
        }
    }
    for (model, keys) in samples {
        let archive = outcome.archives.entry(model.clone()).or_insert_with(|| ForecastArchive {
            model: model.clone(),
            ..Default::default()
        });
        for (key, per_step) in keys {
            if archive.forecasts.contains_key(&key) {
                return Err(Error::Archive(format!("{model} {key}: given in both quantile and sample form")));
            }
            let paths: Vec<Vec<f64>> = per_step.into_iter().map(|m| m.into_values().collect()).collect();
            if let Some(missing) = paths.iter().position(Vec::is_empty) {
                return Err(Error::Archive(format!("{model} {key}: no samples for step {} (wrong H)", missing + 1)));
            }
            let qf = samples_to_quantiles(&paths).map_err(|e| Error::Archive(format!("{model} {key}: {e}")))?;
            archive.forecasts.insert(key, qf);
        }
    }
    Ok(outcome)
}

/// Compares an archive against the keys the corpus requires.
pub fn coverage(archive: &ForecastArchive, expected: &[ForecastKey], rejected_rows: usize) -> CoverageReport {
    let missing: Vec<ForecastKey> = expected
        .iter()
        .filter(|k| !archive.forecasts.contains_key(*k))
        .cloned()
        .collect();
    let covered = expected.len() - missing.len();
    CoverageReport {
        model: archive.model.clone(),
        expected: expected.len(),
        covered,
        summary: format!("{} missing", missing.len()),
        missing,
        incomplete: archive.incomplete.clone(),
        rejected_rows,
    }
}

/// Writes forecasts in the wide layout, rows ordered by key then step.
pub fn write_forecasts_csv(archives: &[&ForecastArchive], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Archive(format!("{other:?}")),
    })?;
    let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
    header.extend(QUANTILE_COLUMNS);
    w.write_record(&header)?;
    for a in archives {
        for (key, qf) in &a.forecasts {
            for (step, q) in qf.values.iter().enumerate() {
                let mut rec = vec![
                    a.model.clone(),
                    key.dataset.clone(),
                    key.horizon.clone(),
                    key.series.clone(),
                    key.window.to_string(),
                    key.variate.clone(),
                    (step + 1).to_string(),
                ];
                rec.extend(q.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
