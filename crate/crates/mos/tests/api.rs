use std::path::Path;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{header, HeaderMap, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use ruspeech_core::audio::{write_wav, Waveform};
use ruspeech_core::mos::{Axis, Kind, MosReport};
use ruspeech_mos::{router, MosConfig, MosState, RATINGS_FILE};
use serde_json::{json, Value};
use tower::ServiceExt;

const ADMIN: &str = "admin-secret";

fn internal_ids() -> Vec<(String, Kind)> {
    let real = (1..=9).map(|i| (format!("real_{i:02}"), Kind::Real));
    let synth = (1..=11).map(|i| (format!("synth_{i:02}"), Kind::Synthesized));
    real.chain(synth).collect()
}

fn make_data_dir(dir: &Path) {
    let mut pool = String::new();
    for (i, (id, kind)) in internal_ids().into_iter().enumerate() {
        let samples = (0..400).map(|n| ((n * (i + 1)) as f64 * 0.01).sin() * 0.3).collect();
        let file = format!("{id}.wav");
        write_wav(&Waveform::new(samples, 22050).unwrap(), &dir.join(&file)).unwrap();
        let kind = if kind == Kind::Real { "real" } else { "synthesized" };
        pool.push_str(&format!("{id}|{kind}|{file}\n"));
    }
    std::fs::write(dir.join("pool.txt"), pool).unwrap();
}

fn open(dir: &Path) -> (Arc<MosState>, Router) {
    let state = Arc::new(MosState::open(&MosConfig::new(dir, ADMIN)).unwrap());
    (state.clone(), router(state))
}

struct Reply {
    status: StatusCode,
    headers: HeaderMap,
    body: Bytes,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    Reply { status, headers, body }
}

fn has_kind_key(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.contains_key("kind") || m.values().any(has_kind_key),
        Value::Array(a) => a.iter().any(has_kind_key),
        _ => false,
    }
}

/// Nothing in a respondent-visible reply may reveal a sample's kind.
fn assert_blind(r: &Reply, json_body: bool) {
    for (name, value) in &r.headers {
        let v = value.to_str().unwrap_or("").to_lowercase();
        for needle in ["real", "synth", "kind"] {
            assert!(!v.contains(needle), "header {name}: {v}");
        }
    }
    if json_body {
        let text = String::from_utf8(r.body.to_vec()).unwrap().to_lowercase();
        for needle in ["real", "synth", "\"kind\""] {
            assert!(!text.contains(needle), "body leaks {needle:?}: {text}");
        }
        assert!(!has_kind_key(&r.json()));
    }
}

async fn new_survey(app: &Router) -> (String, Vec<String>) {
    let r = call(app, "POST", "/surveys", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_blind(&r, true);
    let v = r.json();
    let samples = v["samples"].as_array().unwrap().iter().map(|s| s["sampleId"].as_str().unwrap().to_string()).collect();
    (v["token"].as_str().unwrap().to_string(), samples)
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::Naturalness => "naturalness",
        Axis::Intelligibility => "intelligibility",
    }
}

#[tokio::test]
async fn survey_payload_is_blind_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (_, app) = open(dir.path());
    let r = call(&app, "POST", "/surveys", None, None).await;
    assert_blind(&r, true);
    let v = r.json();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 20);
    for s in samples {
        let id = s["sampleId"].as_str().unwrap();
        assert_eq!(s["audioUrl"], format!("/audio/{id}"));
        assert_eq!(s.as_object().unwrap().len(), 2);
    }
    let mut ids: Vec<&str> = samples.iter().map(|s| s["sampleId"].as_str().unwrap()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 20);
    assert_eq!(v["axes"], json!(["naturalness", "intelligibility"]));
    assert_eq!(v["scale"][0], json!({"score": 5, "quality": "Excellent", "distortions": "Imperceptible"}));

    let (_, second) = new_survey(&app).await;
    let first: Vec<&str> = samples.iter().map(|s| s["sampleId"].as_str().unwrap()).collect();
    assert_ne!(first, second, "surveys should get different orders");
}

#[tokio::test]
async fn every_respondent_endpoint_is_blind() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (state, app) = open(dir.path());
    let (token, samples) = new_survey(&app).await;

    for alias in &samples {
        let r = call(&app, "GET", &format!("/audio/{alias}"), None, None).await;
        assert_eq!(r.status, StatusCode::OK);
        assert_eq!(r.headers[header::CONTENT_TYPE], "audio/wav");
        assert_blind(&r, false);
        let internal = internal_ids()
            .into_iter()
            .find(|(id, _)| state.alias(id) == Some(alias.as_str()))
            .unwrap()
            .0;
        let file = std::fs::read(dir.path().join(format!("{internal}.wav"))).unwrap();
        assert_eq!(r.body.as_ref(), file.as_slice());
    }
    assert_blind(&call(&app, "GET", "/audio/real_01", None, None).await, true);
    assert_blind(&call(&app, "GET", "/audio/x99", None, None).await, true);

    let ok = json!({"sampleId": samples[0], "axis": "naturalness", "score": 4});
    for r in [
        call(&app, "POST", "/ratings", Some(&token), Some(ok.clone())).await,
        call(&app, "POST", "/ratings", Some(&token), Some(ok.clone())).await,
        call(&app, "POST", "/ratings", Some(&token), Some(json!({"sampleId": samples[0], "axis": "naturalness", "score": 6}))).await,
        call(&app, "POST", "/ratings", Some(&token), Some(json!({"sampleId": "real_01", "axis": "naturalness", "score": 3}))).await,
        call(&app, "POST", "/ratings", Some(&token), Some(json!({"sampleId": samples[0], "axis": "kindness", "score": 3}))).await,
        call(&app, "POST", "/ratings", Some("nope"), Some(ok.clone())).await,
        call(&app, "POST", "/ratings", None, Some(ok.clone())).await,
        call(&app, "GET", "/ratings", Some(&token), None).await,
        call(&app, "GET", "/ratings", None, None).await,
        call(&app, "GET", "/report", Some(&token), None).await,
        call(&app, "GET", "/report", None, None).await,
    ] {
        assert_blind(&r, true);
    }

    let admin = call(&app, "GET", "/report", Some(ADMIN), None).await;
    assert_eq!(admin.status, StatusCode::OK);
    assert!(has_kind_key(&admin.json()));
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (_, app) = open(dir.path());
    let (token, samples) = new_survey(&app).await;
    let rate = |sample: &str, score: i64| json!({"sampleId": sample, "axis": "intelligibility", "score": score});

    let r = call(&app, "POST", "/ratings", Some(&token), Some(rate(&samples[0], 6))).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["error"], "score_out_of_range");
    let r = call(&app, "POST", "/ratings", Some(&token), Some(rate(&samples[0], 0))).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = call(&app, "POST", "/ratings", Some(&token), Some(rate("x99", 3))).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["error"], "unknown_sample");
    let r = call(&app, "POST", "/ratings", None, Some(rate(&samples[0], 3))).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = call(&app, "POST", "/ratings", Some(&token), Some(json!({"sampleId": samples[0]}))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = call(&app, "GET", "/report", Some("wrong"), None).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = call(&app, "GET", "/audio/x99", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn full_survey_persists_40_ratings() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (state, app) = open(dir.path());
    let (token, samples) = new_survey(&app).await;
    for s in &samples {
        for axis in ["naturalness", "intelligibility"] {
            let r = call(&app, "POST", "/ratings", Some(&token), Some(json!({"sampleId": s, "axis": axis, "score": 3}))).await;
            assert_eq!(r.status, StatusCode::OK);
            assert_eq!(r.json()["status"], "stored");
        }
    }
    let again = json!({"sampleId": samples[0], "axis": "naturalness", "score": 3});
    let r = call(&app, "POST", "/ratings", Some(&token), Some(again)).await;
    assert_eq!(r.json()["status"], "unchanged");
    let change = json!({"sampleId": samples[0], "axis": "naturalness", "score": 5});
    let r = call(&app, "POST", "/ratings", Some(&token), Some(change)).await;
    assert_eq!(r.json()["status"], "replaced");

    let own = call(&app, "GET", "/ratings", Some(&token), None).await.json();
    assert_eq!(own["ratings"].as_array().unwrap().len(), 40);
    assert_eq!(state.rating_count(), 40);
    let log = std::fs::read_to_string(dir.path().join(RATINGS_FILE)).unwrap();
    assert_eq!(log.lines().count(), 41);

    let report = state.report();
    assert_eq!(report.cell(Kind::Real, Axis::Naturalness).count, 9);
    assert_eq!(report.cell(Kind::Synthesized, Axis::Intelligibility).count, 11);
}

#[tokio::test]
async fn table3_fixture_over_http() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (state, app) = open(dir.path());
    // (kind, axis, base score, target mean); the first `high` ratings of a
    // cell get base + 1.
    let plan = [
        (Kind::Real, Axis::Naturalness, 4i64, 4.83),
        (Kind::Real, Axis::Intelligibility, 4, 4.87),
        (Kind::Synthesized, Axis::Naturalness, 3, 3.78),
        (Kind::Synthesized, Axis::Intelligibility, 4, 4.05),
    ];
    let tokens: Vec<String> = {
        let mut t = Vec::new();
        for _ in 0..50 {
            t.push(new_survey(&app).await.0);
        }
        t
    };
    for (kind, axis, base, target) in plan {
        let aliases: Vec<&str> = internal_ids()
            .iter()
            .filter(|(_, k)| *k == kind)
            .map(|(id, _)| state.alias(id).unwrap())
            .collect();
        let n = aliases.len() * tokens.len();
        let high = ((target - base as f64) * n as f64).round() as usize;
        let mut k = 0;
        for token in &tokens {
            for a in &aliases {
                let score = if k < high { base + 1 } else { base };
                let body = json!({"sampleId": a, "axis": axis_name(axis), "score": score});
                assert_eq!(call(&app, "POST", "/ratings", Some(token), Some(body)).await.status, StatusCode::OK);
                k += 1;
            }
        }
    }
    let v = call(&app, "GET", "/report", Some(ADMIN), None).await.json();
    let report: MosReport = serde_json::from_value(json!({"cells": v["cells"]})).unwrap();
    assert_eq!(report.row(Kind::Real), "4.83 / 4.87");
    assert_eq!(report.row(Kind::Synthesized), "3.78 / 4.05");
    let table = v["table"].as_str().unwrap();
    assert!(table.lines().any(|l| l.split_whitespace().eq(["Real", "speech", "4.83", "4.87"])));
    assert!(table.lines().any(|l| l.split_whitespace().eq(["Synthesized", "speech", "3.78", "4.05"])));
}

#[tokio::test]
async fn restart_keeps_sessions_and_ratings() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (token, samples) = {
        let (_, app) = open(dir.path());
        let (token, samples) = new_survey(&app).await;
        let body = json!({"sampleId": samples[3], "axis": "intelligibility", "score": 2});
        call(&app, "POST", "/ratings", Some(&token), Some(body)).await;
        (token, samples)
    };
    let (state, app) = open(dir.path());
    assert_eq!(state.rating_count(), 1);
    let own = call(&app, "GET", "/ratings", Some(&token), None).await.json();
    assert_eq!(own["ratings"][0]["sampleId"], samples[3]);
    assert_eq!(own["ratings"][0]["score"], 2);
    let (_, next) = new_survey(&app).await;
    assert_eq!(next.len(), 20);
    let surveys = std::fs::read_to_string(dir.path().join("surveys.jsonl")).unwrap();
    assert_eq!(surveys.lines().count(), 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_submissions_are_all_kept() {
    let dir = tempfile::tempdir().unwrap();
    make_data_dir(dir.path());
    let (state, app) = open(dir.path());
    let mut handles = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let (token, samples) = new_survey(&app).await;
            for s in &samples {
                for axis in ["naturalness", "intelligibility"] {
                    let body = json!({"sampleId": s, "axis": axis, "score": 4});
                    assert_eq!(call(&app, "POST", "/ratings", Some(&token), Some(body)).await.status, StatusCode::OK);
                }
            }
        }));
    }
    for h in handles {
        h.await.unwrap();
    }
    assert_eq!(state.rating_count(), 320);
    let log = std::fs::read_to_string(dir.path().join(RATINGS_FILE)).unwrap();
    assert_eq!(log.lines().count(), 320);
    for line in log.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
    let (reopened, _) = open(dir.path());
    assert_eq!(reopened.report(), state.report());
}
