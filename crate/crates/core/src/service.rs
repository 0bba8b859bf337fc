//! HTTP service for the assessor workbench.
//!
//! The server is the only place aggregates are computed for clients. Leaf
//! edits use optimistic concurrency: a PUT carries the token it was based on
//! and fails with 409 if the stored revision moved on. Writes to one
//! assessment are also serialized by an in-process lock.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::analytics::{self, AnalyticsError};
use crate::assessment::{Assessment, EntryStatus, EvidenceItem, LeafEntry};
use crate::rubric::{CriterionId, Rubric};
use crate::scoring::{score_tree, ScoringError, ScoringOptions};
use crate::store::{Store, StoreError, VersionToken};

pub const TOKEN_HEADER: &str = "x-version-token";

struct AppState {
    store: Store,
    rubric: Rubric,
    write_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    fn write_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.write_locks
            .lock()
            .expect("lock table poisoned")
            .entry(id.to_string())
            .or_default()
            .clone()
    }

    fn all(&self) -> Result<Vec<(String, Assessment)>, ApiError> {
        self.store
            .list()?
            .into_iter()
            .map(|id| Ok((id.clone(), self.store.read(&id, &self.rubric)?.0)))
            .collect()
    }
}

type Shared = Arc<AppState>;

/// Error body: `{"error": "..."}` with a matching status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::InvalidId(_) => StatusCode::BAD_REQUEST,
            StoreError::Conflict { .. } => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<ScoringError> for ApiError {
    fn from(e: ScoringError) -> Self {
        let status = match &e {
            ScoringError::UnknownId(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Scoring(s) => s.into(),
            AnalyticsError::UnknownLeaf(_) => ApiError::new(StatusCode::NOT_FOUND, e.to_string()),
            other => ApiError::new(StatusCode::BAD_REQUEST, other.to_string()),
        }
    }
}

fn json_with_token<T: Serialize>(body: &T, token: &VersionToken) -> Response {
    let mut resp = Json(body).into_response();
    if let Ok(v) = HeaderValue::from_str(&token.0) {
        resp.headers_mut().insert(TOKEN_HEADER, v);
    }
    resp
}

/// Routes over `store`. The rubric is read once, at construction.
pub fn router(store: Store) -> Result<Router, StoreError> {
    let rubric = store.rubric()?;
    let state = Arc::new(AppState {
        store,
        rubric,
        write_locks: Mutex::new(HashMap::new()),
    });
    Ok(Router::new()
        .route("/rubric", get(get_rubric))
        .route("/assessments", get(list_assessments))
        .route("/assessments/:id", get(get_assessment))
        .route("/assessments/:id/report", get(get_report))
        .route("/assessments/:id/leaves/:criterion", put(put_leaf))
        .route("/whatif", post(post_whatif))
        .route("/bestinclass", get(get_best_in_class))
        .route("/rank", get(get_rank))
        .route("/diff", get(get_diff))
        .route("/lint/:id", get(get_lint))
        .with_state(state))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(store: Store, addr: SocketAddr) -> std::io::Result<()> {
    let app = router(store).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await
}

async fn get_rubric(State(s): State<Shared>) -> Response {
    let body = s.rubric.to_canonical_json().unwrap_or_default();
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Serialize)]
struct Listing {
    id: String,
    company: String,
    framework_title: String,
    framework_version: String,
    token: VersionToken,
}

async fn list_assessments(State(s): State<Shared>) -> Result<Json<Vec<Listing>>, ApiError> {
    let mut out = Vec::new();
    for id in s.store.list()? {
        let (a, token) = s.store.read(&id, &s.rubric)?;
        out.push(Listing {
            id,
            company: a.subject.company,
            framework_title: a.subject.framework_title,
            framework_version: a.subject.framework_version,
            token,
        });
    }
    Ok(Json(out))
}

async fn get_assessment(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (text, token) = s.store.read_raw(&id)?;
    let document: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let body = serde_json::json!({ "id": id, "token": token, "assessment": document });
    Ok(json_with_token(&body, &token))
}

async fn get_report(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (a, token) = s.store.read(&id, &s.rubric)?;
    let report = score_tree(&s.rubric, &a, ScoringOptions::default())?;
    Ok(json_with_token(&report, &token))
}

/// Body of a leaf edit. Omitted text fields keep their stored values.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LeafUpdate {
    pub score: u32,
    #[serde(default)]
    pub rationale: Option<String>,
    #[serde(default)]
    pub evidence: Option<Vec<EvidenceItem>>,
    #[serde(default)]
    pub improvements: Option<String>,
    #[serde(default)]
    pub status: Option<EntryStatus>,
    pub expected_token: VersionToken,
}

async fn put_leaf(
    State(s): State<Shared>,
    Path((id, criterion)): Path<(String, String)>,
    Json(update): Json<LeafUpdate>,
) -> Result<Response, ApiError> {
    let criterion: CriterionId = criterion
        .parse()
        .map_err(|e: crate::rubric::InvalidId| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let node = s
        .rubric
        .node(&criterion)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown criterion {criterion}")))?;
    if !node.is_leaf() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("{criterion} is not a leaf")));
    }
    if !s.rubric.scale().contains(update.score) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("score {} is not a scale point", update.score),
        ));
    }

    let lock = s.write_lock(&id);
    let _guard = lock.lock().await;
    let (mut a, current) = s.store.read(&id, &s.rubric)?;
    if current != update.expected_token {
        return Err(StoreError::Conflict {
            id,
            expected: update.expected_token,
            current,
        }
        .into());
    }
    let previous = a.entries.get(&criterion).cloned();
    let entry = LeafEntry {
        score: update.score,
        rationale: update
            .rationale
            .or_else(|| previous.as_ref().map(|p| p.rationale.clone()))
            .unwrap_or_default(),
        evidence: update
            .evidence
            .or_else(|| previous.as_ref().map(|p| p.evidence.clone()))
            .unwrap_or_default(),
        improvements: update.improvements.or_else(|| previous.as_ref().and_then(|p| p.improvements.clone())),
        status: update
            .status
            .or_else(|| previous.as_ref().map(|p| p.status))
            .unwrap_or_default(),
    };
    if entry.rationale.trim().is_empty() && entry.evidence.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "a leaf needs a rationale or at least one evidence item",
        ));
    }
    a.entries.insert(criterion, entry);
    let token = s.store.write(&id, &a, Some(&current))?;
    let report = score_tree(&s.rubric, &a, ScoringOptions { missing_as_zero: a.partial })?;
    let body = serde_json::json!({ "token": token, "report": report });
    Ok(json_with_token(&body, &token))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Every leaf raised to the best score any stored assessment achieves.
    BestInClass,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub id: String,
    #[serde(default)]
    pub overrides: BTreeMap<CriterionId, u32>,
    #[serde(default)]
    pub preset: Option<Preset>,
}

async fn post_whatif(State(s): State<Shared>, Json(req): Json<WhatIfRequest>) -> Result<Response, ApiError> {
    let (a, token) = s.store.read(&req.id, &s.rubric)?;
    let mut overrides = BTreeMap::new();
    if let Some(Preset::BestInClass) = req.preset {
        let peers: Vec<Assessment> = s.all()?.into_iter().map(|(_, a)| a).collect();
        let bic = analytics::best_in_class(&s.rubric, &peers, ScoringOptions::default())?;
        overrides = bic.leaf_scores();
    }
    overrides.extend(req.overrides);
    let result = analytics::what_if(&s.rubric, &a, &overrides, ScoringOptions::default())?;
    Ok(json_with_token(&result, &token))
}

#[derive(Serialize)]
struct BestInClassBody {
    leaf_scores: BTreeMap<CriterionId, u32>,
    #[serde(flatten)]
    inner: analytics::BestInClass,
}

async fn get_best_in_class(State(s): State<Shared>) -> Result<Json<BestInClassBody>, ApiError> {
    let all: Vec<Assessment> = s.all()?.into_iter().map(|(_, a)| a).collect();
    let bic = analytics::best_in_class(&s.rubric, &all, ScoringOptions::default())?;
    Ok(Json(BestInClassBody {
        leaf_scores: bic.leaf_scores(),
        inner: bic,
    }))
}

async fn get_rank(State(s): State<Shared>) -> Result<Json<analytics::Ranking>, ApiError> {
    let reports = s
        .all()?
        .iter()
        .map(|(_, a)| score_tree(&s.rubric, a, ScoringOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Json(analytics::rank_and_stats(&reports)?))
}

#[derive(Deserialize)]
struct DiffQuery {
    base: String,
    head: String,
}

async fn get_diff(State(s): State<Shared>, Query(q): Query<DiffQuery>) -> Result<Json<analytics::DiffReport>, ApiError> {
    let (base, _) = s.store.read(&q.base, &s.rubric)?;
    let (head, _) = s.store.read(&q.head, &s.rubric)?;
    Ok(Json(analytics::diff(&s.rubric, &base, &head, ScoringOptions::default())?))
}

#[derive(Deserialize)]
struct LintQuery {
    tolerance: Option<i64>,
}

async fn get_lint(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<LintQuery>,
) -> Result<Json<Vec<analytics::LintFinding>>, ApiError> {
    let (a, _) = s.store.read(&id, &s.rubric)?;
    let tolerance = q.tolerance.unwrap_or(analytics::DEFAULT_TOLERANCE);
    Ok(Json(analytics::lint_consistency(&s.rubric, &a, tolerance, ScoringOptions::default())?))
}
