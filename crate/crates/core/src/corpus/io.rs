//! Manifest and series-file reading and writing.
//!
//! A corpus is a JSON manifest listing datasets; each dataset references CSV
//! series files with a `timestamp,<variate...>` header. Empty cells are
//! missing values. Relative paths resolve against the manifest directory.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{infer_frequency, rectify_timestamps, DatasetSpec, FrequencySpec, Horizon, RawRow, RawSeries, SeriesRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDataset {
    pub dataset_id: String,
    pub domain: String,
    pub freq_code: String,
    pub test_length: usize,
    pub horizons: Vec<Horizon>,
    pub series: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub datasets: Vec<ManifestDataset>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestFile {
    Object(Manifest),
    List(Vec<ManifestDataset>),
}

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// Parses an ISO-8601 timestamp. Offsets are converted to UTC.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    let s = s.strip_suffix('Z').unwrap_or(s);
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .map(|d| d.and_time(chrono::NaiveTime::MIN))
        })
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S").to_string()
}

/// Reads a series CSV into raw rows. Cells that fail to parse as numbers
/// mark their column as non-numeric and are treated as missing.
pub fn read_series_csv(path: &Path) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::load(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::load(path, e.to_string()))?
        .clone();
    if headers.get(0) != Some("timestamp") {
        return Err(Error::load(path, "first column must be `timestamp`"));
    }
    let variate_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if variate_names.is_empty() {
        return Err(Error::load(path, "no variate columns"));
    }
    let mut numeric = vec![true; variate_names.len()];
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::load(path, e.to_string()))?;
        if record.len() != variate_names.len() + 1 {
            return Err(Error::load(path, format!("row {} has {} fields", line + 2, record.len())));
        }
        let timestamp = parse_timestamp(&record[0])
            .ok_or_else(|| Error::load(path, format!("row {}: bad timestamp {:?}", line + 2, &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(d, cell)| {
                if cell.is_empty() {
                    return None;
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    Ok(_) => None,
                    Err(_) => {
                        numeric[d] = false;
                        None
                    }
                }
            })
            .collect();
        rows.push(RawRow { timestamp, values });
    }
    if rows.is_empty() {
        return Err(Error::load(path, "no rows"));
    }
    if rows.windows(2).any(|w| w[1].timestamp <= w[0].timestamp) {
        return Err(Error::load(path, "timestamps must be strictly increasing"));
    }
    let series_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::load(path, "unnamed series file"))?
        .to_string();
    Ok(RawSeries {
        series_id,
        variate_names,
        numeric,
        rows,
    })
}

fn load_dataset(entry: &ManifestDataset, base: &Path, manifest_path: &Path) -> Result<DatasetSpec> {
    let field = |name: &str, msg: String| Error::load(manifest_path, format!("dataset {}: {name}: {msg}", entry.dataset_id));
    let freq = FrequencySpec::parse(&entry.freq_code).map_err(|e| field("freq_code", e.to_string()))?;
    if entry.series.is_empty() {
        return Err(field("series", "no series files".into()));
    }

    let mut series = Vec::with_capacity(entry.series.len());
    for rel in &entry.series {
        let path = base.join(rel);
        if !path.is_file() {
            return Err(Error::load(&path, "series file not found"));
        }
        let raw = read_series_csv(&path)?;
        if raw.rows.len() >= 3 {
            let stamps: Vec<_> = raw.rows.iter().map(|r| r.timestamp).collect();
            if let Ok(inferred) = infer_frequency(&stamps) {
                if inferred.code != freq.code {
                    return Err(Error::load(
                        &path,
                        format!("freq_code is {} but timestamps indicate {}", freq.code, inferred.code),
                    ));
                }
            }
        }
        let record = rectify_timestamps(&raw, freq).map_err(|e| Error::load(&path, e.to_string()))?;
        if let Some(first) = series.first().map(|s: &SeriesRecord| s.variate_names()) {
            if record.variate_names() != first {
                return Err(Error::load(&path, "variate names differ from the dataset's first series"));
            }
        }
        if entry.test_length >= record.len() {
            return Err(Error::load(
                &path,
                format!("test_length {} must be shorter than the series length {}", entry.test_length, record.len()),
            ));
        }
        series.push(record);
    }

    let dataset = DatasetSpec {
        dataset_id: entry.dataset_id.clone(),
        domain: entry.domain.clone(),
        freq,
        series,
        test_length: entry.test_length,
        horizons: entry.horizons.clone(),
    };
    dataset.validate().map_err(|e| Error::load(manifest_path, e.to_string()))?;
    Ok(dataset)
}

/// Loads and validates every dataset listed in a manifest.
pub fn load_corpus(manifest_path: impl AsRef<Path>) -> Result<Vec<DatasetSpec>> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::load(manifest_path, e.to_string()))?;
    let manifest = match serde_json::from_str::<ManifestFile>(&text)
        .map_err(|e| Error::load(manifest_path, format!("schema violation: {e}")))?
    {
        ManifestFile::Object(m) => m,
        ManifestFile::List(datasets) => Manifest { datasets },
    };
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut ids = std::collections::BTreeSet::new();
    manifest
        .datasets
        .iter()
        .map(|entry| {
            if !ids.insert(entry.dataset_id.as_str()) {
                return Err(Error::load(manifest_path, format!("duplicate dataset_id {}", entry.dataset_id)));
            }
            load_dataset(entry, base, manifest_path)
        })
        .collect()
}

fn write_series_csv(series: &SeriesRecord, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::load(path, e.to_string()))?;
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.variates.iter().map(|v| v.name.clone()));
    writer.write_record(&header)?;
    for (i, t) in series.timestamps().iter().enumerate() {
        let mut row = vec![format_timestamp(t)];
        row.extend(series.variates.iter().map(|v| v.get(i).map(|x| x.to_string()).unwrap_or_default()));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes datasets as `<dir>/manifest.json` plus one CSV per series under
/// `<dir>/<dataset_id>/`. Values are written in shortest round-trip form, so
/// loading the result reproduces the datasets exactly.
pub fn write_corpus(datasets: &[DatasetSpec], dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let mut manifest = Manifest { datasets: Vec::new() };
    for ds in datasets {
        let ds_dir = dir.join(&ds.dataset_id);
        fs::create_dir_all(&ds_dir).map_err(|e| Error::io(&ds_dir, e))?;
        let mut files = Vec::new();
        for s in &ds.series {
            let rel = PathBuf::from(&ds.dataset_id).join(format!("{}.csv", s.series_id));
            write_series_csv(s, &dir.join(&rel))?;
            files.push(rel);
        }
        manifest.datasets.push(ManifestDataset {
            dataset_id: ds.dataset_id.clone(),
            domain: ds.domain.clone(),
            freq_code: ds.freq.code.as_str().to_string(),
            test_length: ds.test_length,
            horizons: ds.horizons.clone(),
            series: files,
        });
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
