//! HTTP service for the browser workbench.
//!
//! A session holds one parsed model and the last scenario submitted to it.
//! Computational endpoints take an optional scenario, run in a blocking
//! task and return documents from [`api`] carrying an input digest; the
//! session version travels in the `x-session-version` header so replaying
//! a request yields a byte-identical body.

pub mod api;
pub mod error;
pub mod store;

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::{ServeDir, ServeFile};

use toffa_core::{parse_model, Model, Scenario};

pub use error::ApiError;
pub use store::{Session, Store};

use api::{ComputeRequest, Params};

pub const VERSION_HEADER: &str = "x-session-version";

#[derive(Clone, Default)]
pub struct AppState {
    pub store: Arc<Store>,
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    source: String,
}

fn versioned<T: Serialize>(status: StatusCode, version: u64, doc: T) -> Response {
    let mut r = (status, Json(doc)).into_response();
    r.headers_mut()
        .insert(VERSION_HEADER, HeaderValue::from(version));
    r
}

fn is_json(h: &HeaderMap) -> bool {
    h.get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"))
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

/// Body is model text, or `{"source": "..."}` when sent as JSON.
async fn create_session(
    State(st): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let source = if is_json(&headers) {
        serde_json::from_slice::<CreateRequest>(&body)
            .map_err(|e| ApiError::BadRequest(e.to_string()))?
            .source
    } else {
        String::from_utf8(body.to_vec()).map_err(|e| ApiError::BadRequest(e.to_string()))?
    };
    let model = parse_model(&source)?;
    let diagnostics = api::admit(&model)?;
    let digest = api::digest(&model, None, "session", &Params::default());
    let s = st.store.create(source, model);
    let doc = api::Created {
        session_id: s.id,
        diagnostics,
        digest,
    };
    Ok(versioned(StatusCode::CREATED, s.version, doc))
}

async fn get_model(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let h = st.store.get(&id)?;
    let s = h.lock().await;
    let doc = api::ModelDoc {
        session_id: s.id.clone(),
        source: s.source.clone(),
        model: (*s.model).clone(),
        scenario: s.scenario.clone(),
        created: s.created,
        updated: s.updated,
        digest: api::digest(&s.model, None, "model", &Params::default()),
    };
    Ok(versioned(StatusCode::OK, s.version, doc))
}

async fn get_ccfs(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let h = st.store.get(&id)?;
    let s = h.lock().await;
    Ok(versioned(StatusCode::OK, s.version, api::ccfs(&s.model)?))
}

async fn post_check(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let h = st.store.get(&id)?;
    let s = h.lock().await;
    Ok(versioned(StatusCode::OK, s.version, api::check(&s.model)))
}

type Op<T> = fn(&Model, &Scenario, &Params) -> Result<T, ApiError>;

/// Runs `op` while holding the session, so concurrent submissions are
/// applied one at a time and each response sees its own version.
async fn compute<T: Serialize + Send + 'static>(
    st: AppState,
    id: String,
    body: Bytes,
    op: Op<T>,
) -> Result<Response, ApiError> {
    let req: ComputeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ComputeRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?
    };
    let h = st.store.get(&id)?;
    let mut s = h.lock().await;
    let submitted = req.scenario.as_ref().map(|x| x.resolve()).transpose()?;
    let scenario = submitted
        .clone()
        .or_else(|| s.scenario.clone())
        .ok_or(ApiError::NoScenario)?;
    let model = s.model.clone();
    let params = Params::from(&req);
    let doc = tokio::task::spawn_blocking(move || op(&model, &scenario, &params))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    if let Some(sc) = submitted {
        s.scenario = Some(sc);
        s.version += 1;
        s.updated = store::now();
    }
    Ok(versioned(StatusCode::OK, s.version, doc))
}

macro_rules! compute_route {
    ($name:ident, $op:expr) => {
        async fn $name(
            State(st): State<AppState>,
            Path(id): Path<String>,
            body: Bytes,
        ) -> Result<Response, ApiError> {
            compute(st, id, body, $op).await
        }
    };
}

compute_route!(post_prioritize, |m, s, _| api::prioritize(m, s));
compute_route!(post_utility, api::utility);
compute_route!(post_optimize, api::optimize);
compute_route!(post_tradeoff, api::tradeoff);
compute_route!(post_adaptation, api::adaptation);

async fn api_not_found() -> ApiError {
    ApiError::NotFound("route".into())
}

/// All endpoints; static files from `static_dir` answer everything else,
/// with `index.html` for unknown paths.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let r = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/model", get(get_model))
        .route("/api/session/{id}/ccfs", get(get_ccfs))
        .route("/api/session/{id}/check", post(post_check))
        .route("/api/session/{id}/prioritize", post(post_prioritize))
        .route("/api/session/{id}/utility", post(post_utility))
        .route("/api/session/{id}/optimize", post(post_optimize))
        .route("/api/session/{id}/tradeoff", post(post_tradeoff))
        .route("/api/session/{id}/adaptation-model", post(post_adaptation))
        .route("/api/{*rest}", any(api_not_found))
        .with_state(state);
    match static_dir {
        Some(dir) => {
            let index = ServeFile::new(dir.join("index.html"));
            r.fallback_service(ServeDir::new(dir).fallback(index))
        }
        None => r,
    }
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub static_dir: Option<PathBuf>,
    /// Sessions are restored from here at start and written back on shutdown.
    pub snapshot: Option<PathBuf>,
}

impl ServeConfig {
    pub fn local(port: u16) -> Self {
        ServeConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], port)),
            static_dir: None,
            snapshot: None,
        }
    }
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    cfg: ServeConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let state = AppState::default();
    if let Some(p) = cfg.snapshot.as_deref().filter(|p| p.exists()) {
        state.store.load(p)?;
    }
    let app = router(state.clone(), cfg.static_dir.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    if let Some(p) = cfg.snapshot.as_deref() {
        state.store.save(p).await?;
    }
    Ok(())
}

/// Binds `cfg.addr` and serves until interrupted.
pub async fn serve(cfg: ServeConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(cfg.addr).await?;
    serve_on(listener, cfg, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/service.md")]
mod guide {}
