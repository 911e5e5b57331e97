//! JSON-over-HTTP view of a pipeline output directory.
//!
//! Artifacts are loaded once at startup. The only write is `POST /decisions`,
//! which appends to `decisions_draft.json`; the draft takes effect only when
//! `finalize` is rerun with `--decisions <out>/decisions_draft.json`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::corpus::{format_timestamp, DatasetSpec, SeriesRecord};
use crate::error::{Error, Result};
use crate::evaluation::{
    ingest_forecasts, seasonal_naive_archive, window_data, ForecastArchive, ForecastKey, ScoreTable, SEASONAL_NAIVE,
};
use crate::features::{FeatureTable, PatternCode};
use crate::metrics::QUANTILE_LEVELS;
use crate::pipeline::{
    build_leaderboard, load_decisions, load_finalized, load_raw_corpus, pattern_codes, read_artifact, summarize,
    write_json, CorpusSummary, EvaluationRun, LeaderboardRequest, QualityArtifact, RunConfig, DECISIONS_DRAFT,
    EVALUATION_RUN, FEATURES_JSON, QUALITY_REPORT, SCORES_JSON,
};
use crate::screening::{Decision, DecisionSet};

/// Everything the endpoints read. Stages that have not run leave their
/// field empty and the matching endpoints answer with a stage-dependency
/// error.
pub struct AppState {
    pub out: PathBuf,
    pub summary: CorpusSummary,
    pub raw: Vec<DatasetSpec>,
    pub finalized: Option<Vec<DatasetSpec>>,
    pub quality: Option<QualityArtifact>,
    pub features: Option<FeatureTable>,
    pub codes: Option<BTreeMap<String, PatternCode>>,
    pub scores: Option<ScoreTable>,
    pub archives: BTreeMap<String, ForecastArchive>,
    draft: Mutex<()>,
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::MissingArtifact(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

impl AppState {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let raw = load_raw_corpus(cfg)?;
        let manifest = match &cfg.corpus {
            Some(p) => p.clone(),
            None => read_artifact::<CorpusSummary>(&cfg.artifact(crate::pipeline::CORPUS_SUMMARY))?.manifest,
        };
        let summary = summarize(manifest, &raw)?;
        let finalized = optional(load_finalized(cfg))?;
        let quality = optional(read_artifact(&cfg.artifact(QUALITY_REPORT)))?;
        let features: Option<FeatureTable> = optional(read_artifact(&cfg.artifact(FEATURES_JSON)))?;
        let codes = features.as_ref().and_then(|t| pattern_codes(t).ok());
        let scores = optional(read_artifact(&cfg.artifact(SCORES_JSON)))?;

        let mut archives = BTreeMap::new();
        if let Some(corpus) = &finalized {
            let run: Option<EvaluationRun> = optional(read_artifact(&cfg.artifact(EVALUATION_RUN)))?;
            if let Some(run) = run {
                archives = ingest_forecasts(&run.forecasts, corpus)?.archives;
            }
            archives.insert(SEASONAL_NAIVE.to_string(), seasonal_naive_archive(corpus)?);
        }
        Ok(Self {
            out: cfg.out.clone(),
            summary,
            raw,
            finalized,
            quality,
            features,
            codes,
            scores,
            archives,
            draft: Mutex::new(()),
        })
    }

    fn draft_path(&self) -> PathBuf {
        self.out.join(DECISIONS_DRAFT)
    }

    fn read_draft(&self) -> Result<DecisionSet> {
        let path = self.draft_path();
        if path.is_file() {
            load_decisions(&path)
        } else {
            Ok(DecisionSet::default())
        }
    }

    /// Validates `decision` against the raw corpus and appends it to the draft.
    pub async fn append_decision(&self, decision: Decision) -> Result<DecisionSet> {
        decision.validate(&self.raw)?;
        let _guard = self.draft.lock().await;
        let mut set = self.read_draft()?;
        set.decisions.push(decision);
        write_json(&self.draft_path(), &set)?;
        Ok(set)
    }
}

/// Structured error body: `{"error": {"kind": ..., "message": ...}}`.
pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match &self.0 {
            Error::UnknownId(_) => StatusCode::NOT_FOUND,
            Error::MissingArtifact(_) => StatusCode::CONFLICT,
            Error::InvalidInput(_) | Error::Decision(_) | Error::Json(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({"error": {"kind": self.0.kind(), "message": self.0.to_string()}});
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;
type Shared = Arc<AppState>;

fn need<'a, T>(v: &'a Option<T>, artifact: &str, out: &std::path::Path) -> ApiResult<&'a T> {
    v.as_ref().ok_or_else(|| ApiError(Error::MissingArtifact(out.join(artifact))))
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn datasets(State(s): State<Shared>) -> Json<CorpusSummary> {
    Json(s.summary.clone())
}

async fn quality(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let q = need(&s.quality, QUALITY_REPORT, &s.out)?;
    let report = q.dataset(&id).ok_or_else(|| Error::UnknownId(format!("dataset `{id}`")))?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Default, Deserialize)]
pub struct SpanQuery {
    /// Half-open row range `start:end`; either side may be empty.
    pub span: Option<String>,
}

fn parse_span(span: Option<&str>, len: usize) -> Result<(usize, usize)> {
    let Some(span) = span else { return Ok((0, len)) };
    let (a, b) = span
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("span {span:?} must look like start:end")))?;
    let parse = |s: &str, default: usize| -> Result<usize> {
        if s.is_empty() {
            Ok(default)
        } else {
            s.parse().map_err(|_| Error::InvalidInput(format!("bad span bound {s:?}")))
        }
    };
    let (start, end) = (parse(a, 0)?, parse(b, len)?.min(len));
    if start > end {
        return Err(Error::InvalidInput(format!("span {span:?} is empty or reversed")));
    }
    Ok((start, end))
}

fn find_series<'a>(corpus: &'a [DatasetSpec], dataset: &str, series: &str) -> Result<(&'a DatasetSpec, &'a SeriesRecord)> {
    let ds = corpus
        .iter()
        .find(|d| d.dataset_id == dataset)
        .ok_or_else(|| Error::UnknownId(format!("dataset `{dataset}`")))?;
    let s = ds
        .series(series)
        .ok_or_else(|| Error::UnknownId(format!("series `{dataset}/{series}`")))?;
    Ok((ds, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariateValues {
    pub dataset: String,
    pub series: String,
    pub variate: String,
    pub span: [usize; 2],
    pub timestamps: Vec<String>,
    /// Raw values with `null` for missing entries.
    pub raw: Vec<Option<f64>>,
    /// Filled and outlier-cleaned values from screening, when available.
    pub cleaned: Option<Vec<f64>>,
    pub imputed_indices: Vec<usize>,
}

async fn variate_values(
    State(s): State<Shared>,
    UrlPath((dataset, series, variate)): UrlPath<(String, String, String)>,
    Query(q): Query<SpanQuery>,
) -> ApiResult<Json<VariateValues>> {
    let (_, rec) = find_series(&s.raw, &dataset, &series)?;
    let v = rec
        .variate(&variate)
        .ok_or_else(|| Error::UnknownId(format!("variate `{dataset}/{series}/{variate}`")))?;
    let (start, end) = parse_span(q.span.as_deref(), v.len())?;
    let vq = s
        .quality
        .as_ref()
        .and_then(|qa| qa.dataset(&dataset))
        .and_then(|r| r.variate(&series, &variate));
    let cleaned = vq.and_then(|vq| vq.cleaned.as_ref()).map(|c| c[start..end].to_vec());
    let imputed_indices = vq
        .map(|vq| {
            vq.imputation_log
                .iter()
                .map(|i| i.index)
                .filter(|i| (start..end).contains(i))
                .collect()
        })
        .unwrap_or_default();
    let grid = rec.grid();
    Ok(Json(VariateValues {
        dataset,
        series,
        variate,
        span: [start, end],
        timestamps: (start..end).map(|i| format_timestamp(&grid.point(i as i64))).collect(),
        raw: (start..end).map(|i| v.get(i)).collect(),
        cleaned,
        imputed_indices,
    }))
}

async fn features(State(s): State<Shared>) -> ApiResult<Response> {
    let t = need(&s.features, FEATURES_JSON, &s.out)?;
    Ok(Json(t).into_response())
}

#[derive(Debug, Default, Deserialize)]
pub struct LeaderboardParams {
    pub level: Option<String>,
    pub mask: Option<String>,
    pub bits: Option<String>,
    pub dataset: Option<String>,
}

async fn leaderboard(State(s): State<Shared>, Query(p): Query<LeaderboardParams>) -> ApiResult<Response> {
    let scores = need(&s.scores, SCORES_JSON, &s.out)?;
    let req = LeaderboardRequest {
        level: p.level,
        dataset: p.dataset,
        mask: p.mask,
        bits: p.bits,
    };
    let lb = build_leaderboard(scores, s.codes.as_ref(), &req)?;
    Ok(json_text(lb.to_json()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    /// `[0, test_start)`.
    pub train: [usize; 2],
    /// `[test_start, len)`.
    pub test: [usize; 2],
    /// `[window_start, window_start + H)`.
    pub window: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariatePrediction {
    pub variate: String,
    /// Full finalized history of the variate.
    pub values: Vec<f64>,
    pub truth: Vec<f64>,
    /// One track per level in `levels`, each of length H.
    pub quantiles: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub model: String,
    pub dataset: String,
    pub horizon: String,
    pub series: String,
    pub window: usize,
    pub levels: Vec<f64>,
    pub timestamps: Vec<String>,
    pub regions: Regions,
    pub variates: Vec<VariatePrediction>,
}

pub fn prediction(state: &AppState, model: &str, key_base: &ForecastKey) -> Result<Prediction> {
    let corpus = state
        .finalized
        .as_ref()
        .ok_or_else(|| Error::MissingArtifact(state.out.join(crate::pipeline::FINALIZED_DIR)))?;
    let archive = state
        .archives
        .get(model)
        .ok_or_else(|| Error::UnknownId(format!("model `{model}`")))?;
    let (_, rec) = find_series(corpus, &key_base.dataset, &key_base.series)?;
    let mut variates = Vec::with_capacity(rec.width());
    let mut regions = None;
    for v in &rec.variates {
        let key = ForecastKey {
            variate: v.name.clone(),
            ..key_base.clone()
        };
        let w = window_data(corpus, &key)?;
        let qf = archive
            .forecasts
            .get(&key)
            .ok_or_else(|| Error::UnknownId(format!("forecast `{model}/{key}`")))?;
        regions.get_or_insert(Regions {
            train: [0, w.test_start],
            test: [w.test_start, rec.len()],
            window: [w.window_start, w.window_start + w.truth.len()],
        });
        variates.push(VariatePrediction {
            variate: v.name.clone(),
            values: v.values.clone(),
            truth: w.truth.to_vec(),
            quantiles: (0..QUANTILE_LEVELS.len())
                .map(|k| qf.values.iter().map(|row| row[k]).collect())
                .collect(),
        });
    }
    let regions = regions.ok_or_else(|| Error::UnknownId(format!("series `{}` has no variates", key_base.series)))?;
    Ok(Prediction {
        model: model.to_string(),
        dataset: key_base.dataset.clone(),
        horizon: key_base.horizon.clone(),
        series: key_base.series.clone(),
        window: key_base.window,
        levels: QUANTILE_LEVELS.to_vec(),
        timestamps: rec.timestamps().iter().map(format_timestamp).collect(),
        regions,
        variates,
    })
}

async fn predictions(
    State(s): State<Shared>,
    UrlPath((model, dataset, horizon, series, window)): UrlPath<(String, String, String, String, usize)>,
) -> ApiResult<Json<Prediction>> {
    let key = ForecastKey {
        dataset,
        horizon,
        series,
        window,
        variate: String::new(),
    };
    Ok(Json(prediction(&s, &model, &key)?))
}

async fn get_decisions(State(s): State<Shared>) -> ApiResult<Json<DecisionSet>> {
    let _guard = s.draft.lock().await;
    Ok(Json(s.read_draft()?))
}

async fn post_decision(State(s): State<Shared>, body: axum::body::Bytes) -> ApiResult<Json<DecisionSet>> {
    let decision: Decision = serde_json::from_slice(&body).map_err(|e| Error::Decision(format!("malformed decision: {e}")))?;
    Ok(Json(s.append_decision(decision).await?))
}

async fn not_found() -> ApiError {
    ApiError(Error::UnknownId("no such endpoint".into()))
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/datasets", get(datasets))
        .route("/datasets/{id}/quality", get(quality))
        .route("/variates/{dataset}/{series}/{variate}/values", get(variate_values))
        .route("/features", get(features))
        .route("/leaderboard", get(leaderboard))
        .route("/predictions/{model}/{dataset}/{horizon}/{series}/{window}", get(predictions))
        .route("/decisions", get(get_decisions).post(post_decision))
        .fallback(not_found)
        .with_state(state)
}

/// Loads the artifacts under `cfg.out` and serves them on
/// `127.0.0.1:<port>` (default 8080) until the process is stopped.
pub async fn serve(cfg: &RunConfig) -> Result<()> {
    let state = Arc::new(AppState::load(cfg)?);
    let port = cfg.port.unwrap_or(8080);
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(format!("127.0.0.1:{port}"), e))?;
    axum::serve(listener, router(state))
        .await
        .map_err(|e| Error::io(format!("127.0.0.1:{port}"), e))
}
