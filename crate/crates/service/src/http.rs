//! HTTP routes over a [`Store`].
//!
//! Record responses are session documents; errors are JSON objects with an
//! `error` code, a `message`, and `violations` where validation failed.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use ptc_core::analytics::{
    build_cohort_graph, cohort_stats, render_dot, render_graph_json, stats_document,
    stats_table_csv, AnalyticsError,
};
use ptc_core::codec::{export_csv, export_filename, write_session_document, CodecError};
use ptc_core::model::{
    catalog, EventId, EventPatch, NewEvent, NodeCategory, PathwayError, PathwayRecord, Violation,
};

use crate::store::{encode_subject, Store, StoreError, StoredPathway};

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
    token: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    violations: Vec<Violation>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    fn violations(code: &'static str, message: String, violations: Vec<Violation>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code,
            message,
            violations,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if !self.violations.is_empty() {
            body["violations"] = serde_json::to_value(&self.violations).unwrap_or_default();
        }
        (self.status, Json(body)).into_response()
    }
}

fn pathway_error(e: PathwayError) -> ApiError {
    match e {
        PathwayError::UnknownEventId(_) => {
            ApiError::new(StatusCode::NOT_FOUND, "UnknownEventId", e.to_string())
        }
        other => {
            let rule = other.rule().expect("validation error carries a rule");
            let message = other.to_string();
            ApiError::violations(
                "Rejected",
                message.clone(),
                vec![Violation {
                    rule,
                    message,
                    event_id: None,
                }],
            )
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let msg = e.to_string();
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "NotFound", msg),
            StoreError::VersionConflict { .. } => {
                ApiError::new(StatusCode::CONFLICT, "VersionConflict", msg)
            }
            StoreError::AlreadyExists(_) => {
                ApiError::new(StatusCode::CONFLICT, "AlreadyExists", msg)
            }
            StoreError::ReadOnlyStore => ApiError::new(StatusCode::FORBIDDEN, "ReadOnlyStore", msg),
            StoreError::InvalidPathway(v) => ApiError::violations("InvalidPathway", msg, v),
            StoreError::Rejected(pe) => pathway_error(pe),
            StoreError::Codec(CodecError::InvalidPathway(v)) => {
                ApiError::violations("InvalidPathway", msg, v)
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", msg),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        let msg = e.to_string();
        match e {
            AnalyticsError::DuplicateSubjectId(_) => {
                ApiError::new(StatusCode::CONFLICT, "DuplicateSubjectId", msg)
            }
            AnalyticsError::InvalidPathway { violations, .. } => {
                ApiError::violations("InvalidPathway", msg, violations)
            }
        }
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", e.to_string()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

fn typed(content_type: &'static str, body: String) -> Response {
    ([(header::CONTENT_TYPE, content_type)], body).into_response()
}

const JSON: &str = "application/json";

fn record_response(status: StatusCode, stored: &StoredPathway) -> ApiResult {
    let text = write_session_document(&stored.document()).map_err(StoreError::from)?;
    Ok((status, [(header::CONTENT_TYPE, JSON)], text).into_response())
}

#[derive(Deserialize)]
struct CreateBody {
    subject_id: String,
    onset: NaiveDate,
    consent: NaiveDate,
    admission: NaiveDate,
}

#[derive(Deserialize)]
struct AddEventBody {
    #[serde(flatten)]
    event: NewEvent,
    #[serde(default)]
    expected_version: Option<u64>,
}

#[derive(Deserialize)]
struct PatchEventBody {
    #[serde(flatten)]
    patch: EventPatch,
    #[serde(default)]
    expected_version: Option<u64>,
}

#[derive(Deserialize, Default)]
struct VersionQuery {
    expected_version: Option<u64>,
}

#[derive(Deserialize, Default)]
struct FormatQuery {
    format: Option<String>,
}

async fn healthz() -> &'static str {
    "ok\n"
}

#[derive(Serialize)]
struct CatalogEntry {
    code: &'static str,
    display_name: &'static str,
}

#[derive(Serialize)]
struct CatalogDoc {
    community: Vec<CatalogEntry>,
    clinical: Vec<CatalogEntry>,
    key: Vec<CatalogEntry>,
    anchor: Vec<CatalogEntry>,
}

async fn get_catalog() -> Json<CatalogDoc> {
    let entries = |c: NodeCategory| {
        catalog::nodes_in(c)
            .map(|n| CatalogEntry {
                code: n.code,
                display_name: n.display_name,
            })
            .collect()
    };
    Json(CatalogDoc {
        community: entries(NodeCategory::Community),
        clinical: entries(NodeCategory::Clinical),
        key: entries(NodeCategory::Key),
        anchor: entries(NodeCategory::Anchor),
    })
}

async fn list_pathways(State(app): State<AppState>) -> Response {
    Json(app.store.list()).into_response()
}

async fn create_pathway(State(app): State<AppState>, body: Bytes) -> ApiResult {
    let b: CreateBody = parse_body(&body)?;
    let p = PathwayRecord::create(b.subject_id, b.onset, b.consent, b.admission)
        .map_err(pathway_error)?;
    let stored = blocking(move || Ok(app.store.create(p)?)).await?;
    record_response(StatusCode::CREATED, &stored)
}

async fn get_pathway(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let stored = app.store.get(&id)?;
    record_response(StatusCode::OK, &stored)
}

async fn add_event(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<VersionQuery>,
    body: Bytes,
) -> ApiResult {
    let b: AddEventBody = parse_body(&body)?;
    let expected = b.expected_version.or(q.expected_version);
    let (stored, _) =
        blocking(move || Ok(app.store.update(&id, expected, |p| p.add_event(b.event))?)).await?;
    record_response(StatusCode::OK, &stored)
}

async fn patch_event(
    State(app): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
    Query(q): Query<VersionQuery>,
    body: Bytes,
) -> ApiResult {
    let b: PatchEventBody = parse_body(&body)?;
    let expected = b.expected_version.or(q.expected_version);
    let eid = EventId::from(eid);
    let (stored, _) = blocking(move || {
        Ok(app
            .store
            .update(&id, expected, |p| p.update_event(&eid, b.patch))?)
    })
    .await?;
    record_response(StatusCode::OK, &stored)
}

async fn delete_event(
    State(app): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
    Query(q): Query<VersionQuery>,
) -> ApiResult {
    let eid = EventId::from(eid);
    let (stored, _) = blocking(move || {
        Ok(app
            .store
            .update(&id, q.expected_version, |p| p.remove_event(&eid))?)
    })
    .await?;
    record_response(StatusCode::OK, &stored)
}

async fn export(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let stored = app.store.get(&id)?;
    let csv = export_csv(&stored.pathway).map_err(StoreError::from)?;
    let filename = export_filename(&stored.pathway.subject_id, false);
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{filename}\""))
        .or_else(|_| {
            let safe = export_filename(&encode_subject(&stored.pathway.subject_id), false);
            HeaderValue::from_str(&format!("attachment; filename=\"{safe}\""))
        })
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
    Ok((
        [
            (
                header::CONTENT_TYPE,
                HeaderValue::from_static("text/csv; charset=utf-8"),
            ),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        csv,
    )
        .into_response())
}

fn bad_format(given: &str, allowed: &str) -> ApiError {
    ApiError::new(
        StatusCode::BAD_REQUEST,
        "BadRequest",
        format!("unknown format `{given}`; expected one of {allowed}"),
    )
}

async fn get_stats(State(app): State<AppState>, Query(q): Query<FormatQuery>) -> ApiResult {
    let format = q.format.unwrap_or_else(|| "doc".into());
    if format != "doc" && format != "csv" {
        return Err(bad_format(&format, "doc, csv"));
    }
    let cohort = app.store.snapshot();
    let stats = cohort_stats(&cohort)?;
    Ok(match format.as_str() {
        "csv" => typed("text/csv; charset=utf-8", stats_table_csv(&stats)),
        _ => typed(JSON, stats_document(&stats)),
    })
}

async fn get_graph(State(app): State<AppState>, Query(q): Query<FormatQuery>) -> ApiResult {
    let format = q.format.unwrap_or_else(|| "dot".into());
    let graph = build_cohort_graph(&app.store.snapshot());
    match format.as_str() {
        "dot" => Ok(typed("text/vnd.graphviz", render_dot(&graph))),
        "doc" => Ok(typed(JSON, render_graph_json(&graph))),
        other => Err(bad_format(other, "dot, doc")),
    }
}

async fn require_token(State(app): State<AppState>, req: Request, next: Next) -> Response {
    let Some(token) = app.token.as_deref() else {
        return next.run(req).await;
    };
    if req.uri().path() == "/healthz" {
        return next.run(req).await;
    }
    let ok = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|given| given == token);
    if ok {
        next.run(req).await
    } else {
        ApiError::new(
            StatusCode::UNAUTHORIZED,
            "Unauthorized",
            "missing or wrong bearer token",
        )
        .into_response()
    }
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route")
}

pub fn router(store: Arc<Store>) -> Router {
    let cfg = store.config().clone();
    let state = AppState {
        store,
        token: cfg.token.filter(|t| !t.is_empty()),
    };
    let app = Router::new()
        .route("/healthz", get(healthz))
        .route("/catalog", get(get_catalog))
        .route("/pathways", get(list_pathways).post(create_pathway))
        .route("/pathways/{id}", get(get_pathway))
        .route("/pathways/{id}/events", post(add_event))
        .route(
            "/pathways/{id}/events/{eid}",
            patch(patch_event).delete(delete_event),
        )
        .route("/pathways/{id}/export.csv", get(export))
        .route("/cohort/stats", get(get_stats))
        .route("/cohort/graph", get(get_graph));
    let app = match cfg.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    };
    app.layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}
