//! Leaderboards at task, dataset, variate and pattern granularity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_geomean, mean_rank, normalize, Metric, NormalizedScores, UnitKind};
use super::scoring::ScoreTable;
use crate::error::{Error, Result};
use crate::features::{PatternCode, PatternQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Task,
    Dataset,
    Variate,
    Pattern,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Task => "task",
            Level::Dataset => "dataset",
            Level::Variate => "variate",
            Level::Pattern => "pattern",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "task" => Ok(Level::Task),
            "dataset" => Ok(Level::Dataset),
            "variate" => Ok(Level::Variate),
            "pattern" => Ok(Level::Pattern),
            other => Err(Error::InvalidInput(format!(
                "unknown leaderboard level `{other}` (expected task, dataset, variate or pattern)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntryDiagnostics {
    pub mase_units: usize,
    pub crps_units: usize,
    pub mase_clamped: usize,
    pub crps_clamped: usize,
    pub mase_missing_units: usize,
    pub crps_missing_units: usize,
    pub mase_undefined_windows: usize,
    pub crps_undefined_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub model: String,
    pub mase_norm: Option<f64>,
    pub crps_norm: Option<f64>,
    pub mase_rank: Option<f64>,
    pub crps_rank: Option<f64>,
    /// Units in scope for this leaderboard.
    pub units: usize,
    pub diagnostics: EntryDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub level: Level,
    /// Pattern query (`--1----`) or dataset id; `None` for global levels.
    pub query: Option<String>,
    pub entries: Vec<LeaderboardEntry>,
    pub diagnostics: Vec<String>,
}

impl Leaderboard {
    pub fn entry(&self, model: &str) -> Option<&LeaderboardEntry> {
        self.entries.iter().find(|e| e.model == model)
    }

    /// Pretty JSON with a trailing newline; the one serialization used for
    /// both files and HTTP responses.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("leaderboard serializes") + "\n"
    }
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

/// Builds entries from already-normalized MASE and CRPS scores.
pub fn leaderboard_from(
    level: Level,
    query: Option<String>,
    mase: &NormalizedScores,
    crps: &NormalizedScores,
    units_in_scope: usize,
) -> Leaderboard {
    let mase_ranks = mean_rank(mase);
    let crps_ranks = mean_rank(crps);
    let models: BTreeSet<&String> = mase.models.iter().chain(&crps.models).collect();
    let mut entries: Vec<LeaderboardEntry> = models
        .into_iter()
        .map(|model| {
            let gm = aggregate_geomean(&mase.model_values(model));
            let gc = aggregate_geomean(&crps.model_values(model));
            LeaderboardEntry {
                model: model.clone(),
                mase_norm: gm.value,
                crps_norm: gc.value,
                mase_rank: mase_ranks.get(model).and_then(|r| r.value),
                crps_rank: crps_ranks.get(model).and_then(|r| r.value),
                units: units_in_scope,
                diagnostics: EntryDiagnostics {
                    mase_units: gm.units,
                    crps_units: gc.units,
                    mase_clamped: gm.clamped_low + gm.clamped_high,
                    crps_clamped: gc.clamped_low + gc.clamped_high,
                    mase_missing_units: mase.missing.get(model).map_or(0, Vec::len),
                    crps_missing_units: crps.missing.get(model).map_or(0, Vec::len),
                    mase_undefined_windows: mase.undefined_windows.get(model).copied().unwrap_or(0),
                    crps_undefined_windows: crps.undefined_windows.get(model).copied().unwrap_or(0),
                },
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        cmp_opt(a.mase_norm, b.mase_norm)
            .then(cmp_opt(a.crps_norm, b.crps_norm))
            .then_with(|| a.model.cmp(&b.model))
    });
    let mut diagnostics = Vec::new();
    for (name, scores) in [("mase", mase), ("crps", crps)] {
        for e in &scores.excluded {
            diagnostics.push(format!("{name}: unit {} excluded ({})", e.unit, e.reason));
        }
    }
    if units_in_scope == 0 {
        diagnostics.push("no units in scope".into());
    }
    Leaderboard {
        level,
        query,
        entries,
        diagnostics,
    }
}

fn scope_size(a: &NormalizedScores, b: &NormalizedScores) -> usize {
    let units: BTreeSet<&String> = a
        .values
        .keys()
        .chain(b.values.keys())
        .chain(a.excluded.iter().map(|e| &e.unit))
        .chain(b.excluded.iter().map(|e| &e.unit))
        .collect();
    units.len()
}

/// Normalized per task, aggregated over all tasks.
pub fn task_leaderboard(table: &ScoreTable) -> Leaderboard {
    let mase = normalize(table, UnitKind::Task, Metric::Mase);
    let crps = normalize(table, UnitKind::Task, Metric::Crps);
    let n = scope_size(&mase, &crps);
    leaderboard_from(Level::Task, None, &mase, &crps, n)
}

/// Task-normalized scores aggregated over one dataset's tasks.
pub fn dataset_leaderboard(table: &ScoreTable, dataset: &str) -> Result<Leaderboard> {
    let mase = normalize(table, UnitKind::Task, Metric::Mase);
    let crps = normalize(table, UnitKind::Task, Metric::Crps);
    let prefix = format!("{dataset}/");
    let keep: BTreeSet<String> = mase
        .values
        .keys()
        .chain(crps.values.keys())
        .chain(mase.excluded.iter().map(|e| &e.unit))
        .filter(|u| u.starts_with(&prefix))
        .cloned()
        .collect();
    if keep.is_empty() {
        return Err(Error::UnknownId(format!("dataset `{dataset}` has no scored tasks")));
    }
    let (m, c) = (mase.restrict(&keep), crps.restrict(&keep));
    Ok(leaderboard_from(Level::Dataset, Some(dataset.to_string()), &m, &c, keep.len()))
}

/// Normalized per variate, aggregated over all variates.
pub fn variate_leaderboard(table: &ScoreTable) -> Leaderboard {
    let mase = normalize(table, UnitKind::Variate, Metric::Mase);
    let crps = normalize(table, UnitKind::Variate, Metric::Crps);
    let n = scope_size(&mase, &crps);
    leaderboard_from(Level::Variate, None, &mase, &crps, n)
}

/// Variate ids (`dataset/series/variate`) whose code satisfies `query`.
pub fn retrieve_by_pattern(codes: &BTreeMap<String, PatternCode>, query: &PatternQuery) -> BTreeSet<String> {
    codes
        .iter()
        .filter(|(_, c)| query.matches(c))
        .map(|(id, _)| id.clone())
        .collect()
}

/// Variate-normalized scores aggregated over the variates retrieved by
/// `query`. An empty retrieval gives an empty leaderboard with a diagnostic.
pub fn pattern_leaderboard(table: &ScoreTable, codes: &BTreeMap<String, PatternCode>, query: &PatternQuery) -> Leaderboard {
    let retrieved = retrieve_by_pattern(codes, query);
    let mase = normalize(table, UnitKind::Variate, Metric::Mase).restrict(&retrieved);
    let crps = normalize(table, UnitKind::Variate, Metric::Crps).restrict(&retrieved);
    if retrieved.is_empty() {
        return Leaderboard {
            level: Level::Pattern,
            query: Some(query.to_string()),
            entries: Vec::new(),
            diagnostics: vec!["no variates match the pattern query".into()],
        };
    }
    let mut lb = leaderboard_from(Level::Pattern, Some(query.to_string()), &mase, &crps, retrieved.len());
    let scored: BTreeSet<&String> = mase.values.keys().chain(mase.excluded.iter().map(|e| &e.unit)).collect();
    let unscored = retrieved.iter().filter(|u| !scored.contains(u)).count();
    if unscored > 0 {
        lb.diagnostics.push(format!("{unscored} retrieved variates have no scores"));
    }
    lb
}
