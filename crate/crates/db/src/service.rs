//! JSON-over-HTTP facade for an [`Engine`].
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/api/images` | annotation | `201 {"id"}` |
//! | GET | `/api/images?sample=n&seed=s` | | `[{"id","thumbnail_url"}]` |
//! | GET | `/api/images/{id}` | | record with `thumbnail_url` |
//! | GET | `/api/thumbnails/{id}.png` | | PNG |
//! | POST | `/api/query/sketch` | sketch query | `[{"id","similarity","matched","thumbnail_url"}]` |
//! | POST | `/api/query/by-image` | `{"id","threshold","invariant"?,"limit"?}` | as above |
//!
//! Errors reply `{"error":{"code","message"}}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use pir_core::model::Threshold;
use pir_core::similarity::ScoredResult;

use crate::doc::{parse, AnnotationDoc, ByImageDoc, RecordDoc, ResultDoc, SketchQueryDoc};
use crate::engine::{Annotation, Engine};
use crate::error::DbError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }
}

impl From<DbError> for ApiError {
    fn from(e: DbError) -> Self {
        use pir_core::Error as E;
        let status = match &e {
            DbError::NotFound(_) | DbError::Core(E::Lookup(_)) => StatusCode::NOT_FOUND,
            DbError::Conflict(_) => StatusCode::CONFLICT,
            DbError::Parse { .. } | DbError::Image(_) | DbError::Core(_) => StatusCode::BAD_REQUEST,
            DbError::Corrupt { .. } | DbError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!("{e}");
            return ApiError::new(status, "internal", "internal error");
        }
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<Engine>>;

pub fn thumbnail_url(id: &str) -> String {
    format!("/api/thumbnails/{id}.png")
}

/// API routes; when `ui_dir` is given its files are served for all other
/// paths.
pub fn router(engine: Arc<Engine>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/images", post(insert_image).get(list_images))
        .route("/api/images/{id}", get(get_image))
        .route("/api/thumbnails/{file}", get(get_thumbnail))
        .route("/api/query/sketch", post(query_sketch))
        .route("/api/query/by-image", post(query_by_image))
        .with_state(engine);
    let app = match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") }),
    };
    app.layer(TraceLayer::new_for_http())
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>()).with_graceful_shutdown(shutdown).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, DbError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => {
            tracing::error!("worker failed: {e}");
            Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error"))
        }
    }
}

async fn insert_image(State(engine): Shared, body: Bytes) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let id = blocking(move || {
        let doc: AnnotationDoc = parse("annotation", body_text(&body)?)?;
        engine.insert_image(&Annotation::from_doc(&doc, None)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

fn body_text(body: &[u8]) -> Result<&str, DbError> {
    std::str::from_utf8(body).map_err(|e| DbError::Parse { what: "request body", line: 1, column: e.valid_up_to() + 1, message: e.to_string() })
}

#[derive(Serialize)]
struct Listing {
    id: String,
    thumbnail_url: String,
}

fn query_param<T: std::str::FromStr>(raw: &Option<String>, key: &str) -> ApiResult<Option<T>> {
    let Some(raw) = raw else { return Ok(None) };
    for pair in raw.split('&') {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        if k == key {
            return v.parse().map(Some).map_err(|_| {
                ApiError::new(StatusCode::BAD_REQUEST, "validation", format!("query parameter {key}={v:?} is not valid"))
            });
        }
    }
    Ok(None)
}

async fn list_images(State(engine): Shared, RawQuery(raw): RawQuery) -> ApiResult<Json<Vec<Listing>>> {
    let sample: Option<usize> = query_param(&raw, "sample")?;
    let seed: Option<u64> = query_param(&raw, "seed")?;
    let records = match sample {
        Some(n) => engine.random_sample(n, seed),
        None => engine.snapshot().records().cloned().collect(),
    };
    Ok(Json(records.iter().map(|r| Listing { id: r.id.clone(), thumbnail_url: thumbnail_url(&r.id) }).collect()))
}

#[derive(Serialize)]
struct RecordReply {
    #[serde(flatten)]
    record: RecordDoc,
    thumbnail_url: String,
}

async fn get_image(State(engine): Shared, Path(id): Path<String>) -> ApiResult<Json<RecordReply>> {
    let snapshot = engine.snapshot();
    let rec = snapshot.get(&id).ok_or_else(|| ApiError::from(DbError::NotFound(format!("no image with id {id:?}"))))?;
    Ok(Json(RecordReply { record: rec.to_doc(), thumbnail_url: thumbnail_url(&id) }))
}

async fn get_thumbnail(State(engine): Shared, Path(file): Path<String>) -> ApiResult<Response> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no thumbnail {file:?}"));
    let id = file.strip_suffix(".png").ok_or_else(not_found)?.to_string();
    let bytes = blocking(move || engine.thumbnail(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

fn results(found: Vec<ScoredResult<String>>) -> Json<Vec<ResultDoc>> {
    Json(
        found
            .into_iter()
            .map(|r| ResultDoc { thumbnail_url: thumbnail_url(&r.id), id: r.id, similarity: r.similarity, matched: r.matched })
            .collect(),
    )
}

async fn query_sketch(State(engine): Shared, body: Bytes) -> ApiResult<Json<Vec<ResultDoc>>> {
    let found = blocking(move || {
        let doc: SketchQueryDoc = parse("sketch query", body_text(&body)?)?;
        Ok(engine.query_sketch(&doc.to_query()?))
    })
    .await?;
    Ok(results(found))
}

async fn query_by_image(State(engine): Shared, body: Bytes) -> ApiResult<Json<Vec<ResultDoc>>> {
    let found = blocking(move || {
        let doc: ByImageDoc = parse("query", body_text(&body)?)?;
        engine.query_by_image(&doc.id, Threshold::new(doc.threshold)?, doc.invariant, doc.limit)
    })
    .await?;
    Ok(results(found))
}
