//! Disk-backed pipeline stages.
//!
//! Every stage reads the artifacts of earlier stages from the output
//! directory and writes its own next to them:
//!
//! | stage       | reads                                   | writes |
//! |-------------|-----------------------------------------|--------|
//! | validate    | corpus manifest                         | `corpus_summary.json` |
//! | screen      | `corpus_summary.json`                   | `quality_report.json` |
//! | finalize    | `quality_report.json`, decisions        | `finalized/`, `provenance.json` |
//! | features    | `finalized/manifest.json`               | `features.json`, `features.csv` |
//! | encode      | `features.json`                         | codes in the feature table, `medians.json`, `separability.json` |
//! | evaluate    | `finalized/manifest.json`, forecasts    | `scores.json`, `scores.csv`, `coverage.json`, `evaluation_run.json` |
//! | leaderboard | `scores.json`, `features.json`          | `leaderboards/` |
//!
//! All JSON is pretty-printed with a trailing newline and every collection is
//! emitted in a fixed order, so rerunning a stage on unchanged inputs
//! reproduces its files byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::{format_timestamp, load_corpus, window_count, write_corpus, DatasetSpec, Horizon};
use crate::error::{Error, Result};
use crate::evaluation::{
    coverage, dataset_leaderboard, expected_keys, ingest_forecasts, pattern_leaderboard, score_all, task_leaderboard,
    variate_id, variate_leaderboard, CoverageReport, Leaderboard, Level, RejectedRow, ScoreTable,
};
use crate::features::{
    compute_feature_table, encode_patterns, separability_report, FeatureMedians, FeatureTable, PatternCode,
    PatternQuery, FEATURE_COUNT,
};
use crate::screening::{apply_decisions, run_screening, DecisionSet, Provenance, QualityReport, ScreeningConfig};

pub const CORPUS_SUMMARY: &str = "corpus_summary.json";
pub const QUALITY_REPORT: &str = "quality_report.json";
pub const FINALIZED_DIR: &str = "finalized";
pub const PROVENANCE: &str = "provenance.json";
pub const FEATURES_JSON: &str = "features.json";
pub const FEATURES_CSV: &str = "features.csv";
pub const MEDIANS: &str = "medians.json";
pub const SEPARABILITY: &str = "separability.json";
pub const SCORES_JSON: &str = "scores.json";
pub const SCORES_CSV: &str = "scores.csv";
pub const COVERAGE: &str = "coverage.json";
pub const EVALUATION_RUN: &str = "evaluation_run.json";
pub const LEADERBOARD_DIR: &str = "leaderboards";
pub const DECISIONS_DRAFT: &str = "decisions_draft.json";

/// Inputs shared by the stages. Paths are validated by each stage before
/// any work starts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub decisions: Option<PathBuf>,
    pub forecasts: Vec<PathBuf>,
    pub out: PathBuf,
    pub port: Option<u16>,
}

impl RunConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            ..Default::default()
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn finalized_manifest(&self) -> PathBuf {
        self.out.join(FINALIZED_DIR).join("manifest.json")
    }
}

/// Files written by a stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub stage: String,
    pub written: Vec<PathBuf>,
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a JSON artifact; a missing file is a stage-dependency error.
pub fn read_artifact<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingArtifact(path.to_path_buf())),
        Err(e) => return Err(Error::io(path, e)),
    };
    serde_json::from_str(&text).map_err(|e| Error::load(path, e.to_string()))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::load(path, format!("{what} not found")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub series_id: String,
    pub length: usize,
    pub start: String,
    pub variates: Vec<String>,
    pub missing: usize,
    pub collisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: String,
    pub domain: String,
    pub freq: String,
    pub seasonal_period: usize,
    pub test_length: usize,
    pub horizons: Vec<Horizon>,
    /// Windows per horizon label.
    pub windows: BTreeMap<String, usize>,
    pub series: Vec<SeriesSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub manifest: PathBuf,
    pub datasets: Vec<DatasetSummary>,
}

pub fn summarize(manifest: PathBuf, datasets: &[DatasetSpec]) -> Result<CorpusSummary> {
    let datasets = datasets
        .iter()
        .map(|d| {
            let windows = d
                .horizons
                .iter()
                .map(|h| window_count(d.test_length, h.length).map(|w| (h.label.clone(), w)))
                .collect::<Result<_>>()?;
            Ok(DatasetSummary {
                dataset_id: d.dataset_id.clone(),
                domain: d.domain.clone(),
                freq: d.freq.code.to_string(),
                seasonal_period: d.freq.seasonal_period,
                test_length: d.test_length,
                horizons: d.horizons.clone(),
                windows,
                series: d
                    .series
                    .iter()
                    .map(|s| SeriesSummary {
                        series_id: s.series_id.clone(),
                        length: s.len(),
                        start: format_timestamp(&s.start),
                        variates: s.variates.iter().map(|v| v.name.clone()).collect(),
                        missing: s.variates.iter().map(|v| v.missing_count()).sum(),
                        collisions: s.collisions.len(),
                    })
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CorpusSummary { manifest, datasets })
}

fn corpus_path(cfg: &RunConfig) -> Result<PathBuf> {
    match &cfg.corpus {
        Some(p) => Ok(p.clone()),
        None => {
            let summary: CorpusSummary = read_artifact(&cfg.artifact(CORPUS_SUMMARY))?;
            Ok(summary.manifest)
        }
    }
}

/// Loads the raw corpus named by `--corpus` or recorded by `validate`.
pub fn load_raw_corpus(cfg: &RunConfig) -> Result<Vec<DatasetSpec>> {
    load_corpus(corpus_path(cfg)?)
}

/// Loads the corpus written by `finalize`.
pub fn load_finalized(cfg: &RunConfig) -> Result<Vec<DatasetSpec>> {
    let manifest = cfg.finalized_manifest();
    if !manifest.is_file() {
        return Err(Error::MissingArtifact(manifest));
    }
    load_corpus(manifest)
}

pub fn validate(cfg: &RunConfig) -> Result<StageOutput> {
    let manifest = cfg
        .corpus
        .clone()
        .ok_or_else(|| Error::InvalidInput("validate requires --corpus".into()))?;
    require_file(&manifest, "corpus manifest")?;
    let manifest = manifest.canonicalize().map_err(|e| Error::io(&manifest, e))?;
    let datasets = load_corpus(&manifest)?;
    for d in &datasets {
        d.validate()?;
    }
    let summary = summarize(manifest, &datasets)?;
    let path = cfg.artifact(CORPUS_SUMMARY);
    write_json(&path, &summary)?;
    Ok(StageOutput {
        stage: "validate".into(),
        written: vec![path],
    })
}

/// Quality reports of all datasets plus the configuration that produced
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityArtifact {
    pub config: ScreeningConfig,
    pub datasets: Vec<QualityReport>,
}

impl QualityArtifact {
    pub fn dataset(&self, id: &str) -> Option<&QualityReport> {
        self.datasets.iter().find(|r| r.dataset_id == id)
    }
}

pub fn load_screening_config(path: Option<&Path>) -> Result<ScreeningConfig> {
    let cfg = match path {
        Some(p) => {
            require_file(p, "screening config")?;
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::load(p, e.to_string()))?
        }
        None => ScreeningConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn screen(cfg: &RunConfig) -> Result<StageOutput> {
    let config = load_screening_config(cfg.config.as_deref())?;
    let corpus = load_raw_corpus(cfg)?;
    let datasets = corpus.iter().map(|d| run_screening(d, &config)).collect();
    let path = cfg.artifact(QUALITY_REPORT);
    write_json(&path, &QualityArtifact { config, datasets })?;
    Ok(StageOutput {
        stage: "screen".into(),
        written: vec![path],
    })
}

pub fn load_decisions(path: &Path) -> Result<DecisionSet> {
    require_file(path, "decisions file")?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Set(DecisionSet),
        List(Vec<crate::screening::Decision>),
    }
    match serde_json::from_str::<Repr>(&text).map_err(|e| Error::load(path, e.to_string()))? {
        Repr::Set(s) => Ok(s),
        Repr::List(decisions) => Ok(DecisionSet { decisions }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceArtifact {
    pub decisions: Option<PathBuf>,
    pub datasets: BTreeMap<String, Vec<Provenance>>,
}

pub fn finalize(cfg: &RunConfig) -> Result<StageOutput> {
    let decisions = match &cfg.decisions {
        Some(p) => load_decisions(p)?,
        None => DecisionSet::default(),
    };
    let quality: QualityArtifact = read_artifact(&cfg.artifact(QUALITY_REPORT))?;
    let corpus = load_raw_corpus(cfg)?;
    decisions.validate(&corpus)?;
    let mut finalized = Vec::with_capacity(corpus.len());
    let mut provenance = BTreeMap::new();
    for d in &corpus {
        let report = quality
            .dataset(&d.dataset_id)
            .ok_or_else(|| Error::InvalidInput(format!("quality report has no entry for {}; rerun screen", d.dataset_id)))?;
        let f = apply_decisions(d, report, &decisions)?;
        provenance.insert(d.dataset_id.clone(), f.provenance);
        finalized.push(f.dataset);
    }
    let dir = cfg.artifact(FINALIZED_DIR);
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let manifest = write_corpus(&finalized, &dir)?;
    let prov_path = cfg.artifact(PROVENANCE);
    write_json(
        &prov_path,
        &ProvenanceArtifact {
            decisions: cfg.decisions.clone(),
            datasets: provenance,
        },
    )?;
    Ok(StageOutput {
        stage: "finalize".into(),
        written: vec![manifest, prov_path],
    })
}

fn write_feature_table(cfg: &RunConfig, table: &FeatureTable) -> Result<Vec<PathBuf>> {
    let json = cfg.artifact(FEATURES_JSON);
    let csv = cfg.artifact(FEATURES_CSV);
    write_json(&json, table)?;
    write_text(&csv, &table.to_csv())?;
    Ok(vec![json, csv])
}

pub fn features(cfg: &RunConfig) -> Result<StageOutput> {
    let corpus = load_finalized(cfg)?;
    let table = compute_feature_table(&corpus)?;
    Ok(StageOutput {
        stage: "features".into(),
        written: write_feature_table(cfg, &table)?,
    })
}

pub fn encode(cfg: &RunConfig) -> Result<StageOutput> {
    let mut table: FeatureTable = read_artifact(&cfg.artifact(FEATURES_JSON))?;
    let medians = encode_patterns(&mut table)?;
    let report = separability_report(&table.encoded_columns());
    let mut written = write_feature_table(cfg, &table)?;
    let m = cfg.artifact(MEDIANS);
    let s = cfg.artifact(SEPARABILITY);
    write_json(&m, &medians)?;
    write_json(&s, &report)?;
    written.extend([m, s]);
    Ok(StageOutput {
        stage: "encode".into(),
        written,
    })
}

/// Forecast files used by the last `evaluate` run, with ingestion results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub forecasts: Vec<PathBuf>,
    pub rows_read: usize,
    pub rejected: Vec<RejectedRow>,
    pub models: Vec<String>,
}

pub fn evaluate(cfg: &RunConfig) -> Result<StageOutput> {
    let mut forecasts = Vec::with_capacity(cfg.forecasts.len());
    for p in &cfg.forecasts {
        require_file(p, "forecast archive")?;
        forecasts.push(p.canonicalize().map_err(|e| Error::io(p, e))?);
    }
    let corpus = load_finalized(cfg)?;
    let ingest = ingest_forecasts(&forecasts, &corpus)?;
    let expected = expected_keys(&corpus)?;
    let rejected_by_model = |m: &str| ingest.rejected.iter().filter(|r| r.model == m).count();
    let coverage_reports: Vec<CoverageReport> = ingest
        .archives
        .values()
        .map(|a| coverage(a, &expected, rejected_by_model(&a.model)))
        .collect();
    let archives: Vec<_> = ingest.archives.values().collect();
    let table = score_all(&archives, &corpus)?;

    let paths = [
        cfg.artifact(SCORES_JSON),
        cfg.artifact(SCORES_CSV),
        cfg.artifact(COVERAGE),
        cfg.artifact(EVALUATION_RUN),
    ];
    write_json(&paths[0], &table)?;
    write_text(&paths[1], &table.to_csv())?;
    write_json(&paths[2], &coverage_reports)?;
    write_json(
        &paths[3],
        &EvaluationRun {
            forecasts,
            rows_read: ingest.rows_read,
            rejected: ingest.rejected.clone(),
            models: ingest.archives.keys().cloned().collect(),
        },
    )?;
    Ok(StageOutput {
        stage: "evaluate".into(),
        written: paths.to_vec(),
    })
}

/// Pattern codes keyed by `dataset/series/variate`. Errors when the feature
/// table has not been encoded yet.
pub fn pattern_codes(table: &FeatureTable) -> Result<BTreeMap<String, PatternCode>> {
    table
        .rows
        .iter()
        .map(|r| {
            let code = r.code.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "feature table has no pattern codes ({}/{}/{}); run encode first",
                    r.dataset_id, r.series_id, r.variate
                ))
            })?;
            Ok((variate_id(&r.dataset_id, &r.series_id, &r.variate), code))
        })
        .collect()
}

/// Request for one leaderboard, as accepted by the CLI and the server.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LeaderboardRequest {
    pub level: Option<String>,
    pub dataset: Option<String>,
    pub mask: Option<String>,
    pub bits: Option<String>,
}

impl LeaderboardRequest {
    /// A mask or bits implies the pattern level; missing bits default to all
    /// ones over the mask.
    pub fn resolve(&self) -> Result<(Level, Option<PatternQuery>)> {
        let level = match &self.level {
            Some(l) => l.parse()?,
            None if self.mask.is_some() => Level::Pattern,
            None => Level::Task,
        };
        if level != Level::Pattern {
            if self.mask.is_some() || self.bits.is_some() {
                return Err(Error::InvalidInput(format!("mask/bits only apply to the pattern level, not {level}")));
            }
            return Ok((level, None));
        }
        let query = match (&self.mask, &self.bits) {
            (Some(m), Some(b)) => PatternQuery::from_mask_bits(m, b)?,
            (Some(m), None) => {
                let q = PatternQuery::from_mask_bits(m, &"1".repeat(FEATURE_COUNT));
                match q {
                    Ok(q) => q,
                    Err(_) => m.parse()?,
                }
            }
            (None, Some(_)) => return Err(Error::InvalidInput("bits given without mask".into())),
            (None, None) => PatternQuery::default(),
        };
        Ok((level, Some(query)))
    }
}

/// Builds the requested leaderboard from scores and (for patterns) codes.
pub fn build_leaderboard(
    scores: &ScoreTable,
    codes: Option<&BTreeMap<String, PatternCode>>,
    req: &LeaderboardRequest,
) -> Result<Leaderboard> {
    let (level, query) = req.resolve()?;
    match level {
        Level::Task => Ok(task_leaderboard(scores)),
        Level::Variate => Ok(variate_leaderboard(scores)),
        Level::Dataset => {
            let id = req
                .dataset
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("dataset level requires a dataset id".into()))?;
            dataset_leaderboard(scores, id)
        }
        Level::Pattern => {
            let codes = codes.ok_or_else(|| Error::InvalidInput("pattern leaderboards need encoded features".into()))?;
            Ok(pattern_leaderboard(scores, codes, &query.unwrap_or_default()))
        }
    }
}

/// File name of a leaderboard inside `leaderboards/`.
pub fn leaderboard_file(lb: &Leaderboard) -> PathBuf {
    match (lb.level, &lb.query) {
        (Level::Dataset, Some(id)) => PathBuf::from("dataset").join(format!("{id}.json")),
        (Level::Pattern, Some(q)) => PathBuf::from("pattern").join(format!("{q}.json")),
        (level, _) => PathBuf::from(format!("{level}.json")),
    }
}

/// Writes the task, variate, per-dataset and per-feature (`F_k = 1` and
/// `F_k = 0`) leaderboards, plus one for an explicit `--mask/--bits` query.
pub fn leaderboard(cfg: &RunConfig, extra: Option<&LeaderboardRequest>) -> Result<StageOutput> {
    let scores: ScoreTable = read_artifact(&cfg.artifact(SCORES_JSON))?;
    let table: FeatureTable = read_artifact(&cfg.artifact(FEATURES_JSON))?;
    let codes = pattern_codes(&table)?;

    let mut boards = vec![task_leaderboard(&scores), variate_leaderboard(&scores)];
    let mut datasets: Vec<&str> = scores.rows.iter().map(|r| r.key.dataset.as_str()).collect();
    datasets.dedup();
    datasets.sort_unstable();
    datasets.dedup();
    for d in datasets {
        boards.push(dataset_leaderboard(&scores, d)?);
    }
    for k in 0..FEATURE_COUNT {
        for bit in [true, false] {
            boards.push(pattern_leaderboard(&scores, &codes, &PatternQuery::single(k, bit)));
        }
    }
    if let Some(req) = extra {
        boards.push(build_leaderboard(&scores, Some(&codes), req)?);
    }

    let dir = cfg.artifact(LEADERBOARD_DIR);
    let mut written = Vec::with_capacity(boards.len());
    for lb in &boards {
        let path = dir.join(leaderboard_file(lb));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_text(&path, &lb.to_json())?;
        if !written.contains(&path) {
            written.push(path);
        }
    }
    Ok(StageOutput {
        stage: "leaderboard".into(),
        written,
    })
}

/// Runs the stages from `validate` through `leaderboard` in order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<StageOutput>> {
    Ok(vec![
        validate(cfg)?,
        screen(cfg)?,
        finalize(cfg)?,
        features(cfg)?,
        encode(cfg)?,
        evaluate(cfg)?,
        leaderboard(cfg, None)?,
    ])
}

/// Loaded medians artifact, if present.
pub fn load_medians(cfg: &RunConfig) -> Result<FeatureMedians> {
    read_artifact(&cfg.artifact(MEDIANS))
}
