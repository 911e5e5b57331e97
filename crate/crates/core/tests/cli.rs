mod common;

use std::fs;
use std::path::Path;

use common::{cli, files_below, fixture, run_cli_sequence, synthetic_manifest};
use serde_json::Value;
use tsbench::synthetic::write_synthetic;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_report(stderr: &[u8]) -> Value {
    serde_json::from_slice(stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(stderr)))
}

#[test]
fn missing_prior_stage_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["features", "--out", s(dir.path())]);
    assert!(!out.status.success());
    let err = error_report(&out.stderr);
    assert_eq!(err["error"]["kind"], "stage_dependency");
    assert!(err["error"]["message"].as_str().unwrap().contains("manifest.json"));

    let out = cli(&["screen", "--out", s(dir.path())]);
    assert_eq!(error_report(&out.stderr)["error"]["kind"], "stage_dependency");
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus_summary.json"));
}

#[test]
fn screen_marks_constant_variate_unpredictable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(cli(&["validate", "--corpus", s(&synthetic_manifest()), "--out", s(out)]).status.success());
    assert!(cli(&["screen", "--out", s(out)]).status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("quality_report.json")).unwrap()).unwrap();
    let retail = report["datasets"].as_array().unwrap().iter().find(|d| d["dataset_id"] == "retail").unwrap();
    for series in retail["series"].as_array().unwrap() {
        let promo = series["variates"].as_array().unwrap().iter().find(|v| v["variate"] == "promo").unwrap();
        assert_eq!(promo["predictable"], false);
    }
}

#[test]
fn finalize_rejects_unknown_id() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(cli(&["validate", "--corpus", s(&synthetic_manifest()), "--out", s(out)]).status.success());
    assert!(cli(&["screen", "--out", s(out)]).status.success());
    let decisions = out.join("bad.json");
    fs::write(
        &decisions,
        r#"{"decisions": [{"target": "series", "id": "energy/nope", "action": "drop"}]}"#,
    )
    .unwrap();
    let res = cli(&["finalize", "--decisions", s(&decisions), "--out", s(out)]);
    assert!(!res.status.success());
    let err = error_report(&res.stderr);
    assert_eq!(err["error"]["kind"], "unknown_id");
    assert!(err["error"]["message"].as_str().unwrap().contains("energy/nope"));
    assert!(!out.join("finalized").exists());
}

#[test]
fn missing_input_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let res = cli(&["validate", "--corpus", "/no/such/manifest.json", "--out", s(dir.path())]);
    assert!(!res.status.success());
    assert_eq!(error_report(&res.stderr)["error"]["kind"], "load");
}

#[test]
fn rerunning_stages_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_cli_sequence(out).unwrap();
    let snapshot = |root: &Path| -> Vec<(std::path::PathBuf, Vec<u8>)> {
        files_below(root).into_iter().map(|f| (f.clone(), fs::read(root.join(f)).unwrap())).collect()
    };
    let before = snapshot(out);
    run_cli_sequence(out).unwrap();
    assert_eq!(before, snapshot(out));
}

#[test]
fn explicit_pattern_query_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_cli_sequence(out).unwrap();
    let res = cli(&["leaderboard", "--out", s(out), "--mask", "F3,F7", "--bits", "10"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let lb: Value = serde_json::from_str(&fs::read_to_string(out.join("leaderboards/pattern/--1---0.json")).unwrap()).unwrap();
    assert_eq!(lb["level"], "pattern");
    assert_eq!(lb["query"], "--1---0");

    let res = cli(&["leaderboard", "--out", s(out), "--level", "task", "--mask", "F3"]);
    assert_eq!(error_report(&res.stderr)["error"]["kind"], "invalid_input");
}

#[test]
fn dropped_items_are_absent_downstream() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_cli_sequence(out).unwrap();
    let features = fs::read_to_string(out.join("features.csv")).unwrap();
    assert!(!features.contains(",promo,"));
    assert!(!features.contains("region4"));
    let scores = fs::read_to_string(out.join("scores.csv")).unwrap();
    assert!(!scores.contains("promo") && !scores.contains("region4"));
    let prov = fs::read_to_string(out.join("provenance.json")).unwrap();
    assert!(prov.contains("retail/promo") && prov.contains("macro/region4"));
}

#[test]
fn bundled_fixture_matches_generator() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic(dir.path(), 7).unwrap();
    let committed = fixture("synthetic");
    let files = files_below(&committed);
    assert_eq!(files, files_below(dir.path()));
    for f in files {
        assert_eq!(
            fs::read(committed.join(&f)).unwrap(),
            fs::read(dir.path().join(&f)).unwrap(),
            "{}",
            f.display()
        );
    }
}
