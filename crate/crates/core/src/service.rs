//! HTTP/JSON API over a [`SessionStore`].
//!
//! | method | path | body / query |
//! |---|---|---|
//! | `POST` | `/sessions` | `{strategy, transform?, preset?, name?}` |
//! | `GET` | `/sessions` | |
//! | `GET` | `/sessions/{id}` | |
//! | `POST` | `/sessions/{id}/suggest` | |
//! | `POST` | `/sessions/{id}/outcome` | `{label: -1 \| 1}` |
//! | `GET` | `/sessions/{id}/report` | `slice_dims=i,j&grid=64&fixed=x1,..,xp` |
//!
//! Errors are `{code, message, witnesses?}`. Mutations of one session are
//! serialized; reads wait for an in-flight mutation of the same session.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::oracle::Transform;
use crate::session::{SessionStore, SliceRequest};
use crate::strategy::StrategySpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub strategy: StrategySpec,
    /// Explicit transform; wins over `preset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Transform>,
    /// `ice_breaking`, `crash_full_grid`, `crash_inner_grid` or `identity`
    /// (the default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl CreateRequest {
    pub fn resolve_transform(&self) -> Result<Transform> {
        if let Some(t) = &self.transform {
            return Ok(t.clone());
        }
        preset(self.preset.as_deref().unwrap_or("identity"), self.strategy.dimension)
    }
}

/// A named transform.
pub fn preset(name: &str, dimension: usize) -> Result<Transform> {
    match name {
        "identity" => Ok(Transform::identity(dimension)),
        "ice_breaking" => Ok(Transform::ice_breaking()),
        "crash_full_grid" => Ok(Transform::crash_full_grid()),
        "crash_inner_grid" => Ok(Transform::crash_inner_grid()),
        other => Err(Error::usage(format!(
            "unknown transform preset {other:?}; expected identity, ice_breaking, crash_full_grid or crash_inner_grid"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRequest {
    pub label: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Violation>,
}

struct Failure(StatusCode, ApiError);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (status, code, witnesses) = match &e {
            Error::SessionNotFound(_) => (StatusCode::NOT_FOUND, "not_found", None),
            Error::NonMonotone(v) => (StatusCode::CONFLICT, "monotonicity_violation", Some(v.clone())),
            Error::SessionState(_) => (StatusCode::CONFLICT, "conflict", None),
            Error::DimensionMismatch { .. } => (StatusCode::BAD_REQUEST, "dimension_mismatch", None),
            Error::Usage(_) | Error::Domain(_) | Error::Json(_) => (StatusCode::BAD_REQUEST, "invalid_request", None),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal", None),
        };
        Failure(
            status,
            ApiError {
                code: code.into(),
                message: e.to_string(),
                witnesses,
            },
        )
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Reply = std::result::Result<Response, Failure>;

#[derive(Clone)]
struct AppState {
    store: Arc<SessionStore>,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
    token: Option<Arc<str>>,
}

impl AppState {
    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks
            .lock()
            .expect("lock table poisoned")
            .entry(id.to_string())
            .or_default()
            .clone()
    }

    /// Runs `f` on a blocking thread while holding the session's lock.
    async fn with_session<T, F>(&self, id: &str, f: F) -> std::result::Result<T, Failure>
    where
        T: Send + 'static,
        F: FnOnce(&SessionStore) -> Result<T> + Send + 'static,
    {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let store = self.store.clone();
        tokio::task::spawn_blocking(move || f(&store))
            .await
            .map_err(|e| Failure::from(Error::SessionState(format!("worker failed: {e}"))))?
            .map_err(Failure::from)
    }
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> std::result::Result<T, Failure> {
    serde_json::from_slice(body).map_err(|e| Failure::from(Error::Json(e)))
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Reply {
    Ok((status, Json(serde_json::to_value(value).map_err(|e| Failure::from(Error::Json(e)))?)).into_response())
}

async fn create(State(app): State<AppState>, body: Bytes) -> Reply {
    let req: CreateRequest = parse(&body)?;
    let store = app.store.clone();
    let record = tokio::task::spawn_blocking(move || -> Result<_> {
        let transform = req.resolve_transform()?;
        Ok(store.create(transform, req.strategy, req.name)?.record().clone())
    })
    .await
    .map_err(|e| Failure::from(Error::SessionState(format!("worker failed: {e}"))))??;
    json(StatusCode::CREATED, &record)
}

async fn list(State(app): State<AppState>) -> Reply {
    let store = app.store.clone();
    let all = tokio::task::spawn_blocking(move || store.list())
        .await
        .map_err(|e| Failure::from(Error::SessionState(format!("worker failed: {e}"))))??;
    json(StatusCode::OK, &all)
}

async fn show(State(app): State<AppState>, Path(id): Path<String>) -> Reply {
    let key = id.clone();
    let record = app
        .with_session(&key, move |store| Ok(store.load(&id)?.record().clone()))
        .await?;
    json(StatusCode::OK, &record)
}

async fn suggest(State(app): State<AppState>, Path(id): Path<String>) -> Reply {
    let key = id.clone();
    let out = app
        .with_session(&key, move |store| {
            let mut s = store.load(&id)?;
            let out = s.suggest();
            store.save(&s)?;
            out
        })
        .await?;
    json(StatusCode::OK, &out)
}

async fn outcome(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: OutcomeRequest = parse(&body)?;
    let key = id.clone();
    let out = app
        .with_session(&key, move |store| {
            let mut s = store.load(&id)?;
            let out = s.record_outcome(req.label);
            // a contradiction changes the status, so persist either way
            store.save(&s)?;
            out
        })
        .await?;
    json(StatusCode::OK, &out)
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::usage(format!("{name}: cannot parse {t:?}")))
        })
        .collect()
}

/// Reads `slice_dims`, `grid` and `fixed` from a report query.
pub fn slice_from_query(q: &HashMap<String, String>) -> Result<Option<SliceRequest>> {
    if !q.contains_key("slice_dims") && !q.contains_key("grid") && !q.contains_key("fixed") {
        return Ok(None);
    }
    let dims = match q.get("slice_dims") {
        Some(text) => match parse_list::<usize>("slice_dims", text)?.as_slice() {
            [a, b] => (*a, *b),
            _ => return Err(Error::usage("slice_dims must be two indices, e.g. 0,1")),
        },
        None => (0, 1),
    };
    let grid = match q.get("grid") {
        Some(g) => g
            .parse()
            .map_err(|_| Error::usage(format!("grid: cannot parse {g:?}")))?,
        None => 64,
    };
    let fixed = q.get("fixed").map(|f| parse_list::<f64>("fixed", f)).transpose()?;
    Ok(Some(SliceRequest { dims, grid, fixed }))
}

async fn report(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let slice = slice_from_query(&q)?;
    let key = id.clone();
    let out = app
        .with_session(&key, move |store| store.load(&id)?.report(slice.as_ref()))
        .await?;
    json(StatusCode::OK, &out)
}

async fn require_token(State(app): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &app.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == &**token);
        if !ok {
            return Failure(
                StatusCode::UNAUTHORIZED,
                ApiError {
                    code: "unauthorized".into(),
                    message: "missing or wrong bearer token".into(),
                    witnesses: None,
                },
            )
            .into_response();
        }
    }
    next.run(req).await
}

async fn fallback() -> Response {
    Failure(
        StatusCode::NOT_FOUND,
        ApiError {
            code: "not_found".into(),
            message: "no such endpoint".into(),
            witnesses: None,
        },
    )
    .into_response()
}

/// The API router. With a token, every request must carry
/// `Authorization: Bearer <token>`.
pub fn router(store: SessionStore, token: Option<String>) -> Router {
    let state = AppState {
        store: Arc::new(store),
        locks: Arc::default(),
        token: token.map(Into::into),
    };
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/suggest", post(suggest))
        .route("/sessions/{id}/outcome", post(outcome))
        .route("/sessions/{id}/report", get(report))
        .fallback(fallback)
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    pub token: Option<String>,
}

impl ServeConfig {
    /// Refuses a non-loopback address without a token.
    pub fn validate(&self) -> Result<()> {
        if !self.bind.ip().is_loopback() && self.token.as_deref().is_none_or(str::is_empty) {
            return Err(Error::usage(format!(
                "refusing to bind {} without a token; set one or bind a loopback address",
                self.bind
            )));
        }
        Ok(())
    }
}

pub struct Server {
    listener: tokio::net::TcpListener,
    app: Router,
}

impl Server {
    pub async fn bind(config: ServeConfig) -> Result<Self> {
        config.validate()?;
        let store = SessionStore::open(&config.data_dir)?;
        let listener = tokio::net::TcpListener::bind(config.bind).await?;
        Ok(Self {
            listener,
            app: router(store, config.token),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<()> {
        axum::serve(self.listener, self.app)
            .with_graceful_shutdown(shutdown)
            .await?;
        Ok(())
    }
}

/// A server running on its own thread; stops when dropped.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<Result<()>>>,
}

impl BackgroundServer {
    pub fn start(config: ServeConfig) -> Result<Self> {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let server = rt.block_on(Server::bind(config))?;
        let addr = server.local_addr()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            rt.block_on(server.run(async {
                let _ = rx.await;
            }))
        });
        Ok(Self {
            addr,
            stop: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop(mut self) -> Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> Result<()> {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t
                .join()
                .map_err(|_| Error::SessionState("server thread panicked".into()))?,
            None => Ok(()),
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_loopback_needs_a_token() {
        let mut c = ServeConfig {
            bind: "0.0.0.0:0".parse().unwrap(),
            data_dir: PathBuf::from("unused"),
            token: None,
        };
        assert!(c.validate().is_err());
        c.token = Some("s3cret".into());
        assert!(c.validate().is_ok());
        c.bind = "127.0.0.1:0".parse().unwrap();
        c.token = None;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn slice_query_parsing() {
        let q: HashMap<String, String> = [("slice_dims", "2,0"), ("grid", "16")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let s = slice_from_query(&q).unwrap().unwrap();
        assert_eq!((s.dims, s.grid), ((2, 0), 16));
        assert!(slice_from_query(&HashMap::new()).unwrap().is_none());
        let bad: HashMap<String, String> = [("slice_dims".to_string(), "1".to_string())].into();
        assert!(slice_from_query(&bad).is_err());
    }
}
