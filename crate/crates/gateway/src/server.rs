//! Web surface: dashboard at `/`, documentation at each api base, calls
//! everywhere else.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderMap, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use sparqlrest_core::router::parse_query;
use sparqlrest_core::{CallOutcome, CallRequest, HttpMethod};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::docs::{render_dashboard, render_docs};
use crate::manager::ApiManager;

const HTML: &str = "text/html; charset=utf-8";

struct Shared {
    manager: Arc<ApiManager>,
    css: Option<String>,
}

pub fn app(manager: Arc<ApiManager>, css: Option<String>) -> Router {
    Router::new().fallback(handle).with_state(Arc::new(Shared { manager, css }))
}

fn respond(status: u16, content_type: &str, body: String) -> Response {
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, content_type.to_owned())], Body::from(body)).into_response()
}

fn outcome_response(outcome: CallOutcome) -> Response {
    respond(outcome.status, &outcome.content_type, outcome.body)
}

async fn handle(State(shared): State<Arc<Shared>>, method: Method, uri: Uri, headers: HeaderMap) -> Response {
    let path = uri.path();
    let manager = &shared.manager;
    let css = shared.css.as_deref();

    if method == Method::GET {
        if path == "/" {
            let page = render_dashboard(&manager.stats().snapshot(), manager.documents(), css);
            return respond(200, HTML, page);
        }
        let trimmed = path.strip_suffix('/').unwrap_or(path);
        if let Some(doc) = manager.documents().find(|d| d.api.url == trimmed) {
            return respond(200, HTML, render_docs(&doc.api, &doc.operations, css));
        }
    }

    let call_method = match method {
        Method::GET => HttpMethod::Get,
        Method::POST => HttpMethod::Post,
        other => {
            let outcome = CallOutcome::error(405, &format!("method {other} is not supported"));
            manager.stats().record_call(None, outcome.status);
            return outcome_response(outcome);
        }
    };
    let request = CallRequest {
        full_path: path.to_owned(),
        query_params: parse_query(uri.query().unwrap_or("")),
        method: call_method,
        accept: headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()).map(str::to_owned),
    };
    let manager = Arc::clone(manager);
    // the endpoint client blocks
    match tokio::task::spawn_blocking(move || manager.call(&request)).await {
        Ok(outcome) => outcome_response(outcome),
        Err(e) => outcome_response(CallOutcome::error(500, &format!("call aborted: {e}"))),
    }
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    manager: Arc<ApiManager>,
    css: Option<String>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app(manager, css)).with_graceful_shutdown(shutdown).await
}

/// A server on its own thread and runtime. Stops when dropped.
pub struct RunningServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl RunningServer {
    /// Binds `addr` (port 0 picks a free port) and starts serving.
    pub fn start(manager: Arc<ApiManager>, addr: &str, css: Option<String>) -> std::io::Result<Self> {
        RunningServer::spawn(app(manager, css), addr)
    }

    pub(crate) fn spawn(router: Router, addr: &str) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::Builder::new().name(format!("server-{addr}")).spawn(move || {
            runtime.block_on(async move {
                axum::serve(listener, router)
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await
            })
        })?;
        Ok(RunningServer { addr, stop: Some(stop), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://host:port`, no trailing slash.
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting, finishes in-flight requests and joins the thread.
    pub fn shutdown(mut self) -> std::io::Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(thread) => thread.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}
