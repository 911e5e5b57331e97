//! Data model, frequency inference, timestamp rectification and test-window
//! enumeration.

mod frequency;
mod grid;
mod io;

use std::collections::BTreeSet;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frequency::{infer_frequency, FrequencyCode, FrequencySpec, Step};
pub use grid::Grid;
pub use io::{format_timestamp, load_corpus, parse_timestamp, read_series_csv, write_corpus, Manifest, ManifestDataset};

/// One column of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variate {
    pub name: String,
    /// Observed values; `NaN` wherever `missing` is set.
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
    /// False when the source column held non-numeric cells.
    pub numeric: bool,
}

impl Variate {
    pub fn from_options(name: impl Into<String>, values: &[Option<f64>]) -> Self {
        Self {
            name: name.into(),
            values: values.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
            missing: values.iter().map(Option::is_none).collect(),
            numeric: true,
        }
    }

    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect();
        Self {
            name: name.into(),
            values,
            missing,
            numeric: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|m| **m).count()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        (!self.missing[i]).then_some(self.values[i])
    }
}

/// Two raw rows that snapped to the same grid slot; the first one was kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapCollision {
    pub grid_index: usize,
    pub kept: NaiveDateTime,
    pub discarded: NaiveDateTime,
}

/// A regular-frequency record of `D` variates over `L` grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub series_id: String,
    pub start: NaiveDateTime,
    pub freq: FrequencySpec,
    pub variates: Vec<Variate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub collisions: Vec<SnapCollision>,
}

impl SeriesRecord {
    /// Series length `L`.
    pub fn len(&self) -> usize {
        self.variates.first().map_or(0, Variate::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of variates `D`.
    pub fn width(&self) -> usize {
        self.variates.len()
    }

    pub fn variate_names(&self) -> Vec<&str> {
        self.variates.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn variate(&self, name: &str) -> Option<&Variate> {
        self.variates.iter().find(|v| v.name == name)
    }

    pub fn grid(&self) -> Grid {
        Grid {
            freq: self.freq,
            origin: self.start,
        }
    }

    /// Grid timestamps reconstructed from `(start, step, L)`.
    pub fn timestamps(&self) -> Vec<NaiveDateTime> {
        self.grid().points(self.len())
    }

    /// Row view suitable for re-rectification.
    pub fn to_raw(&self) -> RawSeries {
        let rows = self
            .timestamps()
            .into_iter()
            .enumerate()
            .map(|(i, timestamp)| RawRow {
                timestamp,
                values: self.variates.iter().map(|v| v.get(i)).collect(),
            })
            .collect();
        RawSeries {
            series_id: self.series_id.clone(),
            variate_names: self.variate_names().iter().map(|s| s.to_string()).collect(),
            numeric: self.variates.iter().map(|v| v.numeric).collect(),
            rows,
        }
    }

    /// Checks the grid and mask invariants.
    pub fn validate(&self) -> Result<()> {
        if self.variates.is_empty() {
            return Err(Error::InvalidInput(format!("series {} has no variates", self.series_id)));
        }
        let len = self.len();
        if len == 0 {
            return Err(Error::InvalidInput(format!("series {} is empty", self.series_id)));
        }
        for v in &self.variates {
            if v.values.len() != len || v.missing.len() != len {
                return Err(Error::InvalidInput(format!(
                    "series {}: variate {} has inconsistent length",
                    self.series_id, v.name
                )));
            }
            if v.values.iter().zip(&v.missing).any(|(x, m)| x.is_nan() != *m) {
                return Err(Error::InvalidInput(format!(
                    "series {}: variate {} mask disagrees with values",
                    self.series_id, v.name
                )));
            }
        }
        if Grid::anchored_at(self.freq, self.start).origin != self.start {
            return Err(Error::InvalidInput(format!(
                "series {}: start {} is not on the {} grid",
                self.series_id, self.start, self.freq.code
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub timestamp: NaiveDateTime,
    pub values: Vec<Option<f64>>,
}

/// Timestamped rows as read from disk, before grid alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub series_id: String,
    pub variate_names: Vec<String>,
    pub numeric: Vec<bool>,
    pub rows: Vec<RawRow>,
}

/// Snaps rows onto the regular grid of `freq`, filling gaps with missing
/// entries. When two rows land on the same slot the first is kept and the
/// collision recorded.
pub fn rectify_timestamps(raw: &RawSeries, freq: FrequencySpec) -> Result<SeriesRecord> {
    let first = raw
        .rows
        .first()
        .ok_or_else(|| Error::InvalidInput(format!("series {} has no rows", raw.series_id)))?;
    if raw.rows.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(Error::InvalidInput(format!(
            "series {}: rows are not sorted by timestamp",
            raw.series_id
        )));
    }
    let width = raw.variate_names.len();
    if let Some(row) = raw.rows.iter().find(|r| r.values.len() != width) {
        return Err(Error::InvalidInput(format!(
            "series {}: row at {} has {} values, expected {width}",
            raw.series_id,
            row.timestamp,
            row.values.len()
        )));
    }

    let grid = Grid::anchored_at(freq, first.timestamp);
    let last = grid.nearest_index(raw.rows.last().expect("non-empty").timestamp);
    let len = usize::try_from(last).expect("sorted rows snap forward") + 1;

    let mut slots: Vec<Option<&RawRow>> = vec![None; len];
    let mut collisions = Vec::new();
    for row in &raw.rows {
        let idx = grid.nearest_index(row.timestamp) as usize;
        match slots[idx] {
            None => slots[idx] = Some(row),
            Some(kept) => collisions.push(SnapCollision {
                grid_index: idx,
                kept: kept.timestamp,
                discarded: row.timestamp,
            }),
        }
    }

    let variates = (0..width)
        .map(|d| {
            let column: Vec<Option<f64>> = slots
                .iter()
                .map(|slot| slot.and_then(|r| r.values[d]).filter(|v| v.is_finite()))
                .collect();
            let mut v = Variate::from_options(raw.variate_names[d].clone(), &column);
            v.numeric = raw.numeric.get(d).copied().unwrap_or(true);
            v
        })
        .collect();

    Ok(SeriesRecord {
        series_id: raw.series_id.clone(),
        start: grid.origin,
        freq,
        variates,
        collisions,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub label: String,
    #[serde(rename = "H")]
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub dataset_id: String,
    pub domain: String,
    pub freq: FrequencySpec,
    pub series: Vec<SeriesRecord>,
    pub test_length: usize,
    pub horizons: Vec<Horizon>,
}

impl DatasetSpec {
    pub fn series(&self, id: &str) -> Option<&SeriesRecord> {
        self.series.iter().find(|s| s.series_id == id)
    }

    pub fn horizon(&self, label: &str) -> Option<&Horizon> {
        self.horizons.iter().find(|h| h.label == label)
    }

    pub fn variate_names(&self) -> Vec<&str> {
        self.series.first().map(SeriesRecord::variate_names).unwrap_or_default()
    }

    /// Index of the first test point of `series`.
    pub fn test_start(&self, series: &SeriesRecord) -> usize {
        series.len() - self.test_length
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(format!("dataset {}: {msg}", self.dataset_id)));
        if self.series.is_empty() {
            return fail("no series".into());
        }
        if self.test_length == 0 {
            return fail("test_length must be positive".into());
        }
        if self.horizons.is_empty() || self.horizons.len() > 3 {
            return fail(format!("expected 1-3 horizons, got {}", self.horizons.len()));
        }
        let mut labels = BTreeSet::new();
        for h in &self.horizons {
            if h.length == 0 || h.length > self.test_length {
                return fail(format!(
                    "horizon {} has H={} outside 1..={}",
                    h.label, h.length, self.test_length
                ));
            }
            if !labels.insert(h.label.as_str()) {
                return fail(format!("duplicate horizon label {}", h.label));
            }
        }
        let names = self.variate_names();
        let mut ids = BTreeSet::new();
        for s in &self.series {
            s.validate()?;
            if !ids.insert(s.series_id.as_str()) {
                return fail(format!("duplicate series id {}", s.series_id));
            }
            if s.freq != self.freq {
                return fail(format!("series {} has frequency {}", s.series_id, s.freq.code));
            }
            if s.variate_names() != names {
                return fail(format!("series {} has different variate names", s.series_id));
            }
            if self.test_length >= s.len() {
                return fail(format!(
                    "test_length {} is not shorter than series {} (length {})",
                    self.test_length,
                    s.series_id,
                    s.len()
                ));
            }
        }
        Ok(())
    }
}

/// One non-overlapping evaluation window inside the test span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestWindow {
    pub series_id: String,
    /// 1-based window index `k`.
    pub index: usize,
    /// `(k - 1)·H`, relative to the first test point.
    pub start_offset: usize,
    pub length: usize,
}

/// Number of complete windows of length `horizon` in a test span.
pub fn window_count(test_length: usize, horizon: usize) -> Result<usize> {
    if horizon == 0 || horizon > test_length {
        return Err(Error::EmptyTask {
            horizon,
            test_length,
        });
    }
    Ok(test_length / horizon)
}

/// Enumerates `⌊L_test / H⌋` contiguous windows per series, starting at the
/// test-set start. A remainder at the end of the test span stays unused.
pub fn enumerate_windows(dataset: &DatasetSpec, horizon: usize) -> Result<Vec<TestWindow>> {
    let count = window_count(dataset.test_length, horizon)?;
    Ok(dataset
        .series
        .iter()
        .flat_map(|s| {
            (1..=count).map(move |k| TestWindow {
                series_id: s.series_id.clone(),
                index: k,
                start_offset: (k - 1) * horizon,
                length: horizon,
            })
        })
        .collect())
}
