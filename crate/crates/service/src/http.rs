//! Axum routes over [`crate::api`].

use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::{ServeDir, ServeFile};
use tower_http::trace::TraceLayer;

use sememe_kb::{Lang, MatchMode, RenderFormat};

use crate::api::{self, ApiError, ErrorClass, Kb};

/// Every query parameter any endpoint understands; unknown ones are ignored.
#[derive(Debug, Default, Deserialize)]
pub struct Params {
    pub q: Option<String>,
    pub lang: Option<String>,
    pub mode: Option<String>,
    pub limit: Option<String>,
    pub format: Option<String>,
    pub ascii_only: Option<String>,
    pub k: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
}

type Shared = State<Arc<Kb>>;
type ParamsResult = Result<Query<Params>, QueryRejection>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.class {
            ErrorClass::BadRequest => StatusCode::BAD_REQUEST,
            ErrorClass::NotFound => StatusCode::NOT_FOUND,
        };
        (status, Json(self.body())).into_response()
    }
}

fn params(raw: ParamsResult) -> Result<Params, ApiError> {
    raw.map(|Query(p)| p).map_err(|e| ApiError::bad_request("BadParameter", e.body_text()))
}

fn json<T: Serialize>(value: Result<T, ApiError>) -> Response {
    match value {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn search(State(kb): Shared, raw: ParamsResult) -> Response {
    json(params(raw).and_then(|p| {
        let q = api::required("q", p.q.as_deref())?;
        let lang = api::param("lang", p.lang.as_deref(), Lang::Auto)?;
        let mode = api::param("mode", p.mode.as_deref(), MatchMode::Exact)?;
        let limit = api::param("limit", p.limit.as_deref(), api::LIMIT_DEFAULT)?;
        api::search(&kb, q, lang, mode, limit)
    }))
}

async fn sense(State(kb): Shared, UrlPath(id): UrlPath<String>) -> Response {
    json(api::parse_sense_id(&id).and_then(|id| api::sense_card(&kb, id)))
}

async fn tree(State(kb): Shared, UrlPath(id): UrlPath<String>, raw: ParamsResult) -> Response {
    json(params(raw).and_then(|p| {
        let id = api::parse_sense_id(&id)?;
        let format = api::param("format", p.format.as_deref(), RenderFormat::Ascii)?;
        let ascii_only = api::parse_flag("ascii_only", p.ascii_only.as_deref())?;
        api::tree(&kb, id, format, ascii_only)
    }))
}

async fn nearest(State(kb): Shared, UrlPath(id): UrlPath<String>, raw: ParamsResult) -> Response {
    json(params(raw).and_then(|p| {
        let id = api::parse_sense_id(&id)?;
        let k = api::param("k", p.k.as_deref(), kb.k_default())?;
        api::nearest(&kb, id, k)
    }))
}

async fn similarity(State(kb): Shared, raw: ParamsResult) -> Response {
    json(params(raw).and_then(|p| {
        let a = api::required("a", p.a.as_deref())?;
        let b = api::required("b", p.b.as_deref())?;
        let lang = api::param("lang", p.lang.as_deref(), Lang::En)?;
        api::similarity(&kb, a, b, lang)
    }))
}

async fn sememes(State(kb): Shared, raw: ParamsResult) -> Response {
    json(params(raw).and_then(|p| Ok(api::sememes(&kb, api::required("q", p.q.as_deref())?))))
}

async fn sememe_senses(State(kb): Shared, UrlPath(id): UrlPath<String>) -> Response {
    json(api::parse_sememe_id(&id).and_then(|id| api::sememe_senses(&kb, id)))
}

async fn stats(State(kb): Shared) -> Response {
    Json(api::stats(&kb)).into_response()
}

async fn no_route() -> Response {
    ApiError::not_found("NotFound", "no such endpoint").into_response()
}

/// The `/api` routes alone.
pub fn router(kb: Arc<Kb>) -> Router {
    Router::new()
        .route("/api/search", get(search))
        .route("/api/sense/{id}", get(sense))
        .route("/api/sense/{id}/tree", get(tree))
        .route("/api/sense/{id}/nearest", get(nearest))
        .route("/api/similarity", get(similarity))
        .route("/api/sememes", get(sememes))
        .route("/api/sememe/{id}/senses", get(sememe_senses))
        .route("/api/stats", get(stats))
        .route("/api", get(no_route))
        .route("/api/{*rest}", get(no_route))
        .with_state(kb)
}

/// The full application: API routes, optional static bundle at `/`, optional
/// cross-origin access for one extra origin, and request tracing.
pub fn app(kb: Arc<Kb>, cors_origin: Option<&HeaderValue>, static_dir: Option<&Path>) -> Router {
    let mut app = router(kb);
    if let Some(dir) = static_dir {
        let index = ServeFile::new(dir.join("index.html"));
        app = app.fallback_service(ServeDir::new(dir).fallback(index));
    } else {
        app = app.fallback(no_route);
    }
    if let Some(origin) = cors_origin {
        app = app.layer(CorsLayer::new().allow_origin(origin.clone()).allow_methods([Method::GET]));
    }
    app.layer(TraceLayer::new_for_http())
}
