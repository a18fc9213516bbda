//! HTTP/JSON service over a shared, immutable [`Engine`].
//!
//! | route | reply |
//! |---|---|
//! | `POST /search-space` `{question, terms?, overrides?, timings?}` | search-space report |
//! | `GET /neighborhood?item=ID` | facts of the item |
//! | `GET /connectivity?item1=A&item2=B` | `{item1, item2, distance, connectivity}` |
//! | `GET /health` | `ok` |

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use log::{error, info};
use serde::Deserialize;
use tokio::sync::oneshot;

use crate::auto::{KSetting, PruneSetting};
use crate::engine::{Engine, QueryConfig};
use crate::error::{Error, Result};
use crate::report::{neighborhood_json, SearchSpaceReport};
use crate::scoring::{SignalMask, SignalWeights};

/// Engine plus the query defaults that request overrides start from.
pub struct AppState {
    pub engine: Engine,
    pub defaults: QueryConfig,
}

/// Per-request replacements for the server's query defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryOverrides {
    pub weights: Option<SignalWeights>,
    #[serde(alias = "d")]
    pub depth: Option<usize>,
    pub k: Option<KSetting>,
    pub k_max: Option<usize>,
    pub p: Option<PruneSetting>,
    pub bm25_top_n: Option<usize>,
    pub ablation: Option<SignalMask>,
}

impl QueryOverrides {
    pub fn apply(&self, base: &QueryConfig) -> QueryConfig {
        let mut q = *base;
        if let Some(w) = self.weights {
            q.weights = w;
        }
        if let Some(d) = self.depth {
            q.depth = d;
        }
        if let Some(k) = self.k {
            q.k = k;
        }
        if let Some(k) = self.k_max {
            q.k_max = k;
        }
        if let Some(p) = self.p {
            q.p = p;
        }
        if let Some(n) = self.bm25_top_n {
            q.bm25_top_n = Some(n);
        }
        if let Some(m) = self.ablation {
            q.ablation = m;
        }
        q
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    pub question: String,
    #[serde(default)]
    pub terms: Option<Vec<String>>,
    #[serde(default)]
    pub overrides: QueryOverrides,
    #[serde(default = "yes")]
    pub timings: bool,
}

fn yes() -> bool {
    true
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(status: StatusCode, message: &str) -> Response {
    json_response(status, serde_json::json!({ "error": message }).to_string())
}

/// Client-caused errors are echoed; anything else is logged and hidden.
fn map_error(e: &Error) -> Response {
    match e {
        Error::InvalidArgument(_) | Error::EmptyQuestion | Error::Config(_) => {
            error_response(StatusCode::BAD_REQUEST, &e.to_string())
        }
        Error::UnknownIdentifier(_) | Error::NotFound(_) => error_response(StatusCode::NOT_FOUND, &e.to_string()),
        other => {
            error!("request failed: {other}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
    }
}

async fn health() -> &'static str {
    "ok"
}

async fn search_space(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: SearchRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, &format!("malformed request: {e}")),
    };
    let task = tokio::task::spawn_blocking(move || {
        let cfg = req.overrides.apply(&state.defaults);
        state
            .engine
            .search_space(&req.question, req.terms.as_deref(), &cfg)
            .map(|space| SearchSpaceReport::new(state.engine.kb(), &space, req.timings).to_json())
    });
    match task.await {
        Ok(Ok(json)) => json_response(StatusCode::OK, json),
        Ok(Err(e)) => map_error(&e),
        Err(e) => {
            error!("search task aborted: {e}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
    }
}

fn required<'a>(params: &'a HashMap<String, String>, key: &str) -> Result<&'a str> {
    params
        .get(key)
        .map(String::as_str)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Error::InvalidArgument(format!("missing query parameter `{key}`")))
}

fn resolve_item(engine: &Engine, id: &str) -> Result<crate::kb::ItemId> {
    engine
        .kb()
        .lookup(id)
        .ok_or_else(|| Error::NotFound(format!("unknown item `{id}`")))
}

async fn neighborhood(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let result = (|| {
        let x = resolve_item(&state.engine, required(&params, "item")?)?;
        neighborhood_json(state.engine.kb(), x)
    })();
    match result {
        Ok(json) => json_response(StatusCode::OK, json),
        Err(e) => map_error(&e),
    }
}

async fn connectivity(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let result = (|| {
        let a = required(&params, "item1")?;
        let b = required(&params, "item2")?;
        let x = resolve_item(&state.engine, a)?;
        let y = resolve_item(&state.engine, b)?;
        let d = state.engine.kb().distance(x, y)?;
        Ok::<_, Error>(serde_json::json!({
            "item1": a,
            "item2": b,
            "distance": d,
            "connectivity": d.connectivity(),
        })
        .to_string())
    })();
    match result {
        Ok(json) => json_response(StatusCode::OK, json),
        Err(e) => map_error(&e),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/search-space", post(search_space))
        .route("/neighborhood", get(neighborhood))
        .route("/connectivity", get(connectivity))
        .with_state(state)
}

/// Serves until Ctrl-C.
pub fn serve(state: AppState, bind: &str) -> Result<()> {
    let listener = TcpListener::bind(bind).map_err(|e| Error::io(bind, e))?;
    let rt = runtime()?;
    rt.block_on(async move {
        let listener = to_tokio(listener)?;
        info!("listening on {}", listener.local_addr().map_err(|e| Error::io(bind, e))?);
        axum::serve(listener, router(Arc::new(state)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Error::io(bind, e))
    })
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))
}

fn to_tokio(listener: TcpListener) -> Result<tokio::net::TcpListener> {
    listener.set_nonblocking(true).map_err(|e| Error::io("listener", e))?;
    tokio::net::TcpListener::from_std(listener).map_err(|e| Error::io("listener", e))
}

/// A server running on its own thread; shut down on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Starts a server in the background. Bind to port 0 for an ephemeral port.
pub fn spawn(state: AppState, bind: &str) -> Result<ServerHandle> {
    let listener = TcpListener::bind(bind).map_err(|e| Error::io(bind, e))?;
    let addr = listener.local_addr().map_err(|e| Error::io(bind, e))?;
    let rt = runtime()?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        rt.block_on(async move {
            let listener = match to_tokio(listener) {
                Ok(l) => l,
                Err(e) => return error!("{e}"),
            };
            let shutdown = async {
                let _ = rx.await;
            };
            if let Err(e) = axum::serve(listener, router(Arc::new(state)))
                .with_graceful_shutdown(shutdown)
                .await
            {
                error!("server stopped: {e}");
            }
        })
    });
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

/// Minimal blocking HTTP/1.1 client: returns the status code and body.
pub fn http_request(addr: SocketAddr, method: &str, target: &str, body: Option<&str>) -> std::io::Result<(u16, String)> {
    let mut stream = TcpStream::connect(addr)?;
    let body = body.unwrap_or("");
    write!(
        stream,
        "{method} {target} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )?;
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw)?;
    let text = String::from_utf8_lossy(&raw);
    let bad = || std::io::Error::new(std::io::ErrorKind::InvalidData, "malformed HTTP response");
    let (head, body) = text.split_once("\r\n\r\n").ok_or_else(bad)?;
    let status = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(bad)?;
    Ok((status, body.to_string()))
}
