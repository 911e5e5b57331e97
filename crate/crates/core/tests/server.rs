mod common;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use tsbench::pipeline::{self, RunConfig, DECISIONS_DRAFT};
use tsbench::server::{router, AppState};

fn config(out: &Path) -> RunConfig {
    RunConfig {
        corpus: Some(common::synthetic_manifest()),
        decisions: Some(common::synthetic_decisions()),
        forecasts: common::synthetic_forecasts(),
        ..RunConfig::new(out)
    }
}

fn app(cfg: &RunConfig) -> axum::Router {
    router(Arc::new(AppState::load(cfg).unwrap()))
}

async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn post(app: &axum::Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn leaderboard_matches_cli_artifact_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::run_all(&cfg).unwrap();
    let app = app(&cfg);

    let cases = [
        ("/leaderboard?level=task", "task.json"),
        ("/leaderboard", "task.json"),
        ("/leaderboard?level=variate", "variate.json"),
        ("/leaderboard?level=dataset&dataset=retail", "dataset/retail.json"),
        ("/leaderboard?mask=F3&bits=1", "pattern/--1----.json"),
        ("/leaderboard?level=pattern&mask=0000001&bits=0000000", "pattern/------0.json"),
    ];
    for (uri, file) in cases {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::OK, "{uri}");
        let artifact = fs::read(dir.path().join("leaderboards").join(file)).unwrap();
        assert_eq!(body, artifact, "{uri}");
    }

    let (status, body) = get(&app, "/leaderboard?level=dataset&dataset=nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json(&body)["error"]["kind"], "unknown_id");
    let (status, _) = get(&app, "/leaderboard?level=bogus").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn read_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::run_all(&cfg).unwrap();
    let app = app(&cfg);

    let (status, body) = get(&app, "/datasets").await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<String> = json(&body)["datasets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["dataset_id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["energy", "retail", "macro"]);

    let (status, body) = get(&app, "/datasets/retail/quality").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&body)["dataset_id"], "retail");
    let (status, body) = get(&app, "/datasets/nope/quality").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json(&body)["error"]["kind"], "unknown_id");

    let (status, body) = get(&app, "/variates/energy/s1/load/values?span=10:20").await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["span"], serde_json::json!([10, 20]));
    assert_eq!(v["raw"].as_array().unwrap().len(), 10);
    assert_eq!(v["cleaned"].as_array().unwrap().len(), 10);
    assert_eq!(v["timestamps"][0], "2020-01-01T10:00:00");
    let (status, _) = get(&app, "/variates/energy/s1/nope/values").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(&app, "/variates/energy/s1/load/values?span=9:3").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, body) = get(&app, "/features").await;
    assert_eq!(status, StatusCode::OK);
    assert!(json(&body)["rows"].as_array().unwrap().iter().all(|r| r["code"].is_string()));

    let (status, _) = get(&app, "/no/such/route").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn predictions_have_regions_and_tracks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::run_all(&cfg).unwrap();
    let app = app(&cfg);

    let (status, body) = get(&app, "/predictions/seasonal_naive/energy/short/s1/2").await;
    assert_eq!(status, StatusCode::OK);
    let p = json(&body);
    assert_eq!(p["regions"]["train"], serde_json::json!([0, 1008]));
    assert_eq!(p["regions"]["test"], serde_json::json!([1008, 1200]));
    assert_eq!(p["regions"]["window"], serde_json::json!([1032, 1056]));
    let variates = p["variates"].as_array().unwrap();
    assert_eq!(variates.len(), 2);
    for v in variates {
        let tracks = v["quantiles"].as_array().unwrap();
        assert_eq!(tracks.len(), 9);
        assert!(tracks.iter().all(|t| t == &tracks[0]), "S-Naive tracks differ");
        assert_eq!(v["truth"].as_array().unwrap().len(), 24);
    }

    let (status, body) = get(&app, "/predictions/noisy-oracle/retail/medium/store2/1").await;
    assert_eq!(status, StatusCode::OK);
    let tracks = json(&body)["variates"][0]["quantiles"].clone();
    let tracks: Vec<Vec<f64>> = serde_json::from_value(tracks).unwrap();
    for step in 0..28 {
        assert!((1..9).all(|k| tracks[k - 1][step] <= tracks[k][step]));
    }

    for uri in [
        "/predictions/nobody/energy/short/s1/1",
        "/predictions/seasonal_naive/energy/short/s1/99",
        "/predictions/seasonal_naive/energy/short/s9/1",
    ] {
        let (status, _) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn posted_drop_removes_variate_after_finalize() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    // no curator decisions yet
    let cfg = RunConfig {
        decisions: None,
        ..config(out)
    };
    pipeline::validate(&cfg).unwrap();
    pipeline::screen(&cfg).unwrap();
    let app = app(&cfg);

    let (status, body) = get(&app, "/decisions").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&body)["decisions"], serde_json::json!([]));

    let (status, set) = post(&app, "/decisions", r#"{"target":"variate","id":"retail/promo","action":"drop"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(set["decisions"].as_array().unwrap().len(), 1);
    let (_, body) = get(&app, "/decisions").await;
    assert_eq!(json(&body)["decisions"][0]["id"], "retail/promo");

    let (status, err) = post(&app, "/decisions", r#"{"target":"variate","id":"retail/nope","action":"drop"}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"]["kind"], "unknown_id");
    let (status, err) = post(&app, "/decisions", r#"{"target":"variate","action":"explode"}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"]["kind"], "decision");
    let (status, _) = post(&app, "/decisions", r#"{"target":"series","id":"macro/region1","action":"trim"}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let cfg = RunConfig {
        decisions: Some(out.join(DECISIONS_DRAFT)),
        ..cfg
    };
    pipeline::finalize(&cfg).unwrap();
    pipeline::features(&cfg).unwrap();
    let corpus = pipeline::load_finalized(&cfg).unwrap();
    let retail = corpus.iter().find(|d| d.dataset_id == "retail").unwrap();
    assert_eq!(retail.variate_names(), vec!["sales"]);
    assert!(!fs::read_to_string(out.join("features.csv")).unwrap().contains(",promo,"));
}

#[tokio::test]
async fn concurrent_posts_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::validate(&cfg).unwrap();
    let state = Arc::new(AppState::load(&cfg).unwrap());
    let mut handles = Vec::new();
    for i in 1..=3 {
        for action in ["keep", "drop"] {
            let app = router(state.clone());
            let body = format!(r#"{{"target":"series","id":"macro/region{i}","action":"{action}"}}"#);
            handles.push(tokio::spawn(async move { post(&app, "/decisions", &body).await.0 }));
        }
    }
    for h in handles {
        assert_eq!(h.await.unwrap(), StatusCode::OK);
    }
    let (_, body) = get(&router(state), "/decisions").await;
    assert_eq!(json(&body)["decisions"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn missing_stage_is_a_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::validate(&cfg).unwrap();
    let app = app(&cfg);
    let (status, body) = get(&app, "/leaderboard?level=task").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(json(&body)["error"]["kind"], "stage_dependency");
    let (status, _) = get(&app, "/features").await;
    assert_eq!(status, StatusCode::CONFLICT);
}
