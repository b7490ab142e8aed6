//! HTTP front end for [`Backend`].

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

use wordsig_core::backend::wire::{DfRequest, ErrorResponse, VectorsRequest};
use wordsig_core::backend::{Backend, DfService};
use wordsig_core::error::BackendError;

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ErrorResponse {
            error: message.into(),
        }),
    )
        .into_response()
}

fn backend_error(e: BackendError) -> Response {
    let status = match e {
        BackendError::EmptySubmission => StatusCode::BAD_REQUEST,
        BackendError::ModelUnavailable => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error(status, e.to_string())
}

// The service calls are synchronous and short; the registry lock is never
// held across an await point.
async fn submit_df(
    State(backend): State<Arc<Backend>>,
    body: Result<Json<DfRequest>, JsonRejection>,
) -> Response {
    match body {
        Ok(Json(req)) => match backend.submit_df(&req) {
            Ok(resp) => Json(resp).into_response(),
            Err(e) => backend_error(e),
        },
        Err(rejection) => error(StatusCode::BAD_REQUEST, rejection.body_text()),
    }
}

async fn fetch_vectors(
    State(backend): State<Arc<Backend>>,
    body: Result<Json<VectorsRequest>, JsonRejection>,
) -> Response {
    match body {
        Ok(Json(req)) => match backend.fetch_vectors(&req) {
            Ok(resp) => Json(resp).into_response(),
            Err(e) => backend_error(e),
        },
        Err(rejection) => error(StatusCode::BAD_REQUEST, rejection.body_text()),
    }
}

async fn health(State(backend): State<Arc<Backend>>) -> Response {
    Json(backend.health()).into_response()
}

pub fn router(backend: Arc<Backend>) -> Router {
    Router::new()
        .route("/v1/df", post(submit_df))
        .route("/v1/vectors", post(fetch_vectors))
        .route("/v1/health", get(health))
        .with_state(backend)
}

#[derive(Debug, Clone)]
pub struct SnapshotPolicy {
    pub path: PathBuf,
    pub interval: Duration,
}

fn write_if_dirty(backend: &Backend, policy: &SnapshotPolicy) {
    if backend.take_dirty() {
        if let Err(e) = backend.save_snapshot(&policy.path) {
            eprintln!("snapshot failed: {e}");
        }
    }
}

/// Serves until `shutdown` resolves. With a snapshot policy the registry is
/// written every `interval` when it changed, and once more on shutdown.
pub async fn serve(
    listener: TcpListener,
    backend: Arc<Backend>,
    snapshot: Option<SnapshotPolicy>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let ticker = snapshot.clone().map(|policy| {
        let backend = backend.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(policy.interval);
            interval.tick().await;
            loop {
                interval.tick().await;
                write_if_dirty(&backend, &policy);
            }
        })
    });
    let result = axum::serve(listener, router(backend.clone()))
        .with_graceful_shutdown(shutdown)
        .await;
    if let Some(t) = ticker {
        t.abort();
    }
    if let Some(policy) = &snapshot {
        write_if_dirty(&backend, policy);
    }
    result
}
