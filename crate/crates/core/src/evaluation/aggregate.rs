//! Seasonal-Naive normalization, geometric-mean aggregation and mean ranks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::archive::{ForecastKey, SEASONAL_NAIVE};
use super::scoring::{ScoreRow, ScoreTable};

pub const CLAMP_MIN: f64 = 1e-6;
pub const CLAMP_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mase,
    Crps,
}

impl Metric {
    pub fn of(&self, row: &ScoreRow) -> Option<f64> {
        match self {
            Metric::Mase => row.score.mase,
            Metric::Crps => row.score.crps,
        }
    }
}

/// Normalization unit granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    /// `dataset/horizon`.
    Task,
    /// `dataset/series/variate`, pooled over horizons and windows.
    Variate,
}

impl UnitKind {
    pub fn unit_of(&self, key: &ForecastKey) -> String {
        match self {
            UnitKind::Task => task_id(&key.dataset, &key.horizon),
            UnitKind::Variate => variate_id(&key.dataset, &key.series, &key.variate),
        }
    }
}

pub fn task_id(dataset: &str, horizon: &str) -> String {
    format!("{dataset}/{horizon}")
}

pub fn variate_id(dataset: &str, series: &str, variate: &str) -> String {
    format!("{dataset}/{series}/{variate}")
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UnitMean {
    /// Arithmetic mean over defined windows; `None` if there are none.
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

/// Per model and unit, the arithmetic mean of defined window values.
/// Summation follows the table's row order.
pub fn unit_means(table: &ScoreTable, kind: UnitKind, metric: Metric) -> BTreeMap<String, BTreeMap<String, UnitMean>> {
    let mut sums: BTreeMap<String, BTreeMap<String, (f64, usize, usize)>> = BTreeMap::new();
    for row in &table.rows {
        let slot = sums
            .entry(row.model.clone())
            .or_default()
            .entry(kind.unit_of(&row.key))
            .or_insert((0.0, 0, 0));
        match metric.of(row) {
            Some(v) => {
                slot.0 += v;
                slot.1 += 1;
            }
            None => slot.2 += 1,
        }
    }
    sums.into_iter()
        .map(|(model, units)| {
            let units = units
                .into_iter()
                .map(|(u, (sum, defined, undefined))| {
                    let mean = (defined > 0).then(|| sum / defined as f64);
                    (u, UnitMean { mean, defined, undefined })
                })
                .collect();
            (model, units)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedUnit {
    pub unit: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedScores {
    /// unit -> model -> model mean / baseline mean.
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
    /// Units dropped for every model because the baseline mean is zero or
    /// undefined.
    pub excluded: Vec<ExcludedUnit>,
    /// model -> units the model has no defined value for.
    pub missing: BTreeMap<String, Vec<String>>,
    /// model -> undefined window count over included units.
    pub undefined_windows: BTreeMap<String, usize>,
    pub models: Vec<String>,
}

impl NormalizedScores {
    /// Keeps only units in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Self {
        Self {
            values: self
                .values
                .iter()
                .filter(|(u, _)| keep.contains(*u))
                .map(|(u, m)| (u.clone(), m.clone()))
                .collect(),
            excluded: self.excluded.iter().filter(|e| keep.contains(&e.unit)).cloned().collect(),
            missing: self
                .missing
                .iter()
                .map(|(m, us)| (m.clone(), us.iter().filter(|u| keep.contains(*u)).cloned().collect()))
                .collect(),
            undefined_windows: self.undefined_windows.clone(),
            models: self.models.clone(),
        }
    }

    pub fn model_values(&self, model: &str) -> Vec<f64> {
        self.values.values().filter_map(|m| m.get(model).copied()).collect()
    }
}

/// Ratio of each model's unit mean to the Seasonal Naive unit mean. Units
/// where the baseline is zero or undefined are excluded for all models.
pub fn normalize(table: &ScoreTable, kind: UnitKind, metric: Metric) -> NormalizedScores {
    let means = unit_means(table, kind, metric);
    let empty = BTreeMap::new();
    let baseline = means.get(SEASONAL_NAIVE).unwrap_or(&empty);
    let mut out = NormalizedScores {
        models: means.keys().cloned().collect(),
        ..Default::default()
    };
    let units: BTreeSet<&String> = means.values().flat_map(|u| u.keys()).collect();
    for unit in units {
        let base = baseline.get(unit).and_then(|m| m.mean);
        let base = match base {
            Some(b) if b > 0.0 => b,
            Some(_) => {
                out.excluded.push(ExcludedUnit {
                    unit: unit.clone(),
                    reason: "seasonal naive mean is zero".into(),
                });
                continue;
            }
            None => {
                out.excluded.push(ExcludedUnit {
                    unit: unit.clone(),
                    reason: "seasonal naive undefined".into(),
                });
                continue;
            }
        };
        let row = out.values.entry(unit.clone()).or_default();
        for (model, units) in &means {
            match units.get(unit) {
                Some(UnitMean { mean: Some(m), undefined, .. }) => {
                    row.insert(model.clone(), m / base);
                    *out.undefined_windows.entry(model.clone()).or_default() += undefined;
                }
                other => {
                    out.missing.entry(model.clone()).or_default().push(unit.clone());
                    if let Some(um) = other {
                        *out.undefined_windows.entry(model.clone()).or_default() += um.undefined;
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeoMean {
    pub value: Option<f64>,
    pub units: usize,
    pub clamped_low: usize,
    pub clamped_high: usize,
}

/// Geometric mean after clamping each value to `[1e-6, 1e6]`.
pub fn aggregate_geomean(values: &[f64]) -> GeoMean {
    let mut g = GeoMean {
        units: values.len(),
        ..Default::default()
    };
    if values.is_empty() {
        return g;
    }
    let mut log_sum = 0.0;
    for &v in values {
        let c = if v < CLAMP_MIN {
            g.clamped_low += 1;
            CLAMP_MIN
        } else if v > CLAMP_MAX {
            g.clamped_high += 1;
            CLAMP_MAX
        } else {
            v
        };
        log_sum += c.ln();
    }
    g.value = Some((log_sum / values.len() as f64).exp());
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanRank {
    pub value: Option<f64>,
    pub units: usize,
}

/// Ranks models within each unit (1 = best, ties share the average rank) and
/// averages over the units each model appears in.
pub fn mean_rank(scores: &NormalizedScores) -> BTreeMap<String, MeanRank> {
    let mut acc: BTreeMap<String, (f64, usize)> = scores.models.iter().map(|m| (m.clone(), (0.0, 0))).collect();
    for per_model in scores.values.values() {
        let mut entries: Vec<(&String, f64)> = per_model.iter().map(|(m, v)| (m, *v)).collect();
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut i = 0;
        while i < entries.len() {
            let mut j = i + 1;
            while j < entries.len() && entries[j].1 == entries[i].1 {
                j += 1;
            }
            let rank = (i + j + 1) as f64 / 2.0;
            for (m, _) in &entries[i..j] {
                let slot = acc.entry((*m).clone()).or_default();
                slot.0 += rank;
                slot.1 += 1;
            }
            i = j;
        }
    }
    acc.into_iter()
        .map(|(m, (sum, n))| {
            (
                m,
                MeanRank {
                    value: (n > 0).then(|| sum / n as f64),
                    units: n,
                },
            )
        })
        .collect()
}
