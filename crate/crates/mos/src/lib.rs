//! HTTP/JSON backend for blind MOS surveys.
//!
//! Respondents only ever see opaque sample aliases; the kind of a sample is
//! visible through `GET /report`, which needs the admin token.
//!
//! | method | path              | auth       |
//! |--------|-------------------|------------|
//! | POST   | `/surveys`        | none       |
//! | GET    | `/audio/{id}`     | none       |
//! | POST   | `/ratings`        | respondent |
//! | GET    | `/ratings`        | respondent |
//! | GET    | `/report`         | admin      |
//!
//! A data directory holds `pool.txt` (`sample_id|kind|path`), the rating log
//! `ratings.jsonl` and the issued surveys in `surveys.jsonl`.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use ruspeech_core::mos::{
    check_score, create_survey, Ack, Axis, MosError, MosReport, Rating, RatingStore, SamplePool, SurveyCounts, SCALE,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub const POOL_FILE: &str = "pool.txt";
pub const RATINGS_FILE: &str = "ratings.jsonl";
pub const SURVEYS_FILE: &str = "surveys.jsonl";

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Mos(#[from] MosError),
    #[error("survey log line {line}: {message}")]
    CorruptSurveyLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct MosConfig {
    pub data_dir: PathBuf,
    pub admin_token: String,
    /// Drives survey orders and public aliases.
    pub seed: u64,
    pub counts: SurveyCounts,
}

impl MosConfig {
    pub fn new(data_dir: impl Into<PathBuf>, admin_token: impl Into<String>) -> Self {
        Self { data_dir: data_dir.into(), admin_token: admin_token.into(), seed: 0, counts: SurveyCounts::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SessionRecord {
    survey_id: String,
    token: String,
    seed: u64,
}

#[derive(Debug, Clone)]
struct Session {
    survey_id: String,
    samples: Vec<String>,
}

struct Sessions {
    by_token: HashMap<String, Session>,
    log: File,
    issued: u64,
}

/// Shared server state. Rating writes are serialized by the store lock.
pub struct MosState {
    store: RwLock<RatingStore>,
    sessions: Mutex<Sessions>,
    alias_of: HashMap<String, String>,
    sample_of: HashMap<String, String>,
    admin_token: String,
    seed: u64,
}

fn mix(seed: u64, n: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ n.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl MosState {
    /// Loads the pool and replays both logs from `config.data_dir`.
    pub fn open(config: &MosConfig) -> Result<Self, ServerError> {
        let dir = &config.data_dir;
        let pool = SamplePool::load(&dir.join(POOL_FILE), config.counts)?;

        // Aliases follow a seeded shuffle so their order says nothing about kind.
        let mut ids: Vec<String> = pool.entries().iter().map(|e| e.sample_id.clone()).collect();
        ids.shuffle(&mut rand::rngs::StdRng::seed_from_u64(mix(config.seed, u64::MAX)));
        let width = ids.len().to_string().len().max(2);
        let mut alias_of = HashMap::new();
        let mut sample_of = HashMap::new();
        for (i, id) in ids.into_iter().enumerate() {
            let alias = format!("x{:0width$}", i + 1);
            sample_of.insert(alias.clone(), id.clone());
            alias_of.insert(id, alias);
        }

        let surveys_path = dir.join(SURVEYS_FILE);
        let mut by_token = HashMap::new();
        let mut issued = 0;
        if surveys_path.exists() {
            for (i, line) in BufReader::new(File::open(&surveys_path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: SessionRecord = serde_json::from_str(&line)
                    .map_err(|e| ServerError::CorruptSurveyLog { line: i + 1, message: e.to_string() })?;
                let survey = create_survey(&pool, &rec.survey_id, rec.seed);
                by_token.insert(rec.token, Session { survey_id: rec.survey_id, samples: survey.samples });
                issued += 1;
            }
        }
        let log = OpenOptions::new().create(true).append(true).open(&surveys_path)?;
        let store = RatingStore::open(pool, &dir.join(RATINGS_FILE))?;
        Ok(Self {
            store: RwLock::new(store),
            sessions: Mutex::new(Sessions { by_token, log, issued }),
            alias_of,
            sample_of,
            admin_token: config.admin_token.clone(),
            seed: config.seed,
        })
    }

    /// Public alias of a pool sample.
    pub fn alias(&self, sample_id: &str) -> Option<&str> {
        self.alias_of.get(sample_id).map(String::as_str)
    }

    pub fn report(&self) -> MosReport {
        self.store.read().expect("store lock").report()
    }

    pub fn rating_count(&self) -> usize {
        self.store.read().expect("store lock").len()
    }

    fn session(&self, headers: &HeaderMap) -> Option<Session> {
        let token = bearer(headers)?;
        self.sessions.lock().expect("session lock").by_token.get(token).cloned()
    }
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers.get(header::AUTHORIZATION)?.to_str().ok()?.strip_prefix("Bearer ")
}

pub fn router(state: Arc<MosState>) -> Router {
    Router::new()
        .route("/surveys", post(create_survey_handler))
        .route("/audio/{id}", get(audio_handler))
        .route("/ratings", post(submit_rating_handler).get(own_ratings_handler))
        .route("/report", get(report_handler))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: Arc<MosState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or unknown bearer token")
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SampleRef {
    sample_id: String,
    audio_url: String,
}

#[derive(Serialize)]
struct ScaleEntry {
    score: u8,
    quality: &'static str,
    distortions: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SurveyResponse {
    survey_id: String,
    token: String,
    samples: Vec<SampleRef>,
    axes: [Axis; 2],
    scale: Vec<ScaleEntry>,
}

async fn create_survey_handler(State(state): State<Arc<MosState>>) -> Result<Json<SurveyResponse>, ApiError> {
    let token: String = {
        let mut rng = rand::rng();
        (0..32).map(|_| char::from_digit(rng.random_range(0..16), 16).expect("hex digit")).collect()
    };
    let mut sessions = state.sessions.lock().expect("session lock");
    let n = sessions.issued;
    let survey_id = format!("survey-{:06}", n + 1);
    let seed = mix(state.seed, n);
    let rec = SessionRecord { survey_id: survey_id.clone(), token: token.clone(), seed };
    let line = serde_json::to_string(&rec).expect("record serializes") + "\n";
    sessions.log.write_all(line.as_bytes()).and_then(|_| sessions.log.flush()).map_err(ApiError::internal)?;
    let survey = create_survey(state.store.read().expect("store lock").pool(), &survey_id, seed);
    sessions.issued += 1;
    sessions.by_token.insert(token.clone(), Session { survey_id: survey_id.clone(), samples: survey.samples.clone() });
    drop(sessions);

    let samples = survey
        .samples
        .iter()
        .map(|id| {
            let alias = state.alias_of[id].clone();
            SampleRef { audio_url: format!("/audio/{alias}"), sample_id: alias }
        })
        .collect();
    Ok(Json(SurveyResponse {
        survey_id,
        token,
        samples,
        axes: Axis::ALL,
        scale: SCALE.iter().map(|&(score, quality, distortions)| ScaleEntry { score, quality, distortions }).collect(),
    }))
}

async fn audio_handler(State(state): State<Arc<MosState>>, UrlPath(alias): UrlPath<String>) -> Result<Response, ApiError> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "unknown_sample", "no such sample");
    let id = state.sample_of.get(&alias).ok_or_else(not_found)?;
    let path: PathBuf = {
        let store = state.store.read().expect("store lock");
        store.pool().get(id).ok_or_else(not_found)?.audio_path.clone()
    };
    let bytes = tokio::fs::read(&path).await.map_err(|_| not_found())?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RatingRequest {
    sample_id: String,
    axis: Axis,
    score: i64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PublicRating {
    sample_id: String,
    axis: Axis,
    score: u8,
}

async fn submit_rating_handler(
    State(state): State<Arc<MosState>>,
    headers: HeaderMap,
    body: axum::body::Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = state.session(&headers).ok_or_else(ApiError::unauthorized)?;
    let req: RatingRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))?;
    let unknown = || ApiError::new(StatusCode::NOT_FOUND, "unknown_sample", "no such sample in this survey");
    let id = state.sample_of.get(&req.sample_id).ok_or_else(unknown)?;
    if !session.samples.contains(id) {
        return Err(unknown());
    }
    let score = check_score(req.score)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "score_out_of_range", e.to_string()))?;
    let rating = Rating {
        respondent_id: session.survey_id,
        sample_id: id.clone(),
        axis: req.axis,
        score,
        timestamp: now_ms(),
    };
    let ack = state.store.write().expect("store lock").submit(rating).map_err(|e| match e {
        MosError::UnknownSample(_) => unknown(),
        other => ApiError::internal(other),
    })?;
    let status = match ack {
        Ack::Stored => "stored",
        Ack::Replaced => "replaced",
        Ack::Unchanged => "unchanged",
    };
    Ok(Json(json!({ "status": status, "sampleId": req.sample_id, "axis": req.axis, "score": score })))
}

async fn own_ratings_handler(
    State(state): State<Arc<MosState>>,
    headers: HeaderMap,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = state.session(&headers).ok_or_else(ApiError::unauthorized)?;
    let ratings: Vec<PublicRating> = state
        .store
        .read()
        .expect("store lock")
        .ratings_of(&session.survey_id)
        .into_iter()
        .map(|r| PublicRating { sample_id: state.alias_of[&r.sample_id].clone(), axis: r.axis, score: r.score })
        .collect();
    Ok(Json(json!({ "surveyId": session.survey_id, "ratings": ratings })))
}

async fn report_handler(State(state): State<Arc<MosState>>, headers: HeaderMap) -> Result<Json<serde_json::Value>, ApiError> {
    if state.admin_token.is_empty() || bearer(&headers) != Some(state.admin_token.as_str()) {
        return Err(ApiError::unauthorized());
    }
    let report = state.report();
    Ok(Json(json!({ "cells": report.cells, "table": report.to_string() })))
}
