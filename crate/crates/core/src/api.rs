//! HTTP boundary over [`GameService`].
//!
//! | route | success |
//! |---|---|
//! | `POST /v1/sessions` | 201 [`SessionCreated`](crate::protocol::SessionCreated) |
//! | `POST /v1/sessions/{id}/events` | 200 [`IngestResult`], or 409 with the same body on a rejection |
//! | `GET /v1/sessions/{id}/state` | 200 [`SessionStateView`](crate::protocol::SessionStateView) |
//! | `GET /v1/sessions/{id}/blueprint` | 200 [`Blueprint`](crate::session::Blueprint) |
//! | `GET /v1/export?kind=&format=&mode=` | 200 byte stream |
//!
//! Errors carry `{"code", "message"}` bodies. Service calls run on the
//! blocking pool because accepted events are synced to disk before the
//! response is sent.

// Early-return helpers hand back finished responses as their error value.
#![allow(clippy::result_large_err)]

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use uuid::Uuid;

use crate::export::{ExportError, ExportFormat, ExportKind, ExportMode};
use crate::protocol::{ErrorBody, IngestBatch, IngestResult, NewSession};
use crate::service::{GameService, ServiceError};
use crate::session::SessionError;
use crate::store::StoreError;

type Shared = Arc<GameService>;

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/events", post(ingest))
        .route("/v1/sessions/{id}/state", get(state))
        .route("/v1/sessions/{id}/blueprint", get(blueprint))
        .route("/v1/export", get(export))
        .with_state(service)
}

/// Serves until `shutdown` resolves, then lets in-flight requests finish.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::UnknownSession(_) | ServiceError::UnknownPack(_) => StatusCode::NOT_FOUND,
        ServiceError::Rejected(SessionError::BadPlayerName) | ServiceError::BadBatch(_) => {
            StatusCode::BAD_REQUEST
        }
        ServiceError::Rejected(_) => StatusCode::CONFLICT,
        ServiceError::Export(
            ExportError::UnsupportedFormat(_)
            | ExportError::UnsupportedKind(_)
            | ExportError::UnsupportedMode(_),
        ) => StatusCode::BAD_REQUEST,
        ServiceError::Store(StoreError::StorageFull(_)) => StatusCode::INSUFFICIENT_STORAGE,
        ServiceError::Export(_) | ServiceError::Store(_) | ServiceError::ContentMismatch(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("response bodies serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn error(e: ServiceError) -> Response {
    if let ServiceError::Store(inner) = &e {
        log::error!("store failure: {inner}");
    }
    json(status_of(&e), &e.body())
}

fn bad_request(code: &str, message: impl Into<String>) -> Response {
    json(
        StatusCode::BAD_REQUEST,
        &ErrorBody {
            code: code.into(),
            message: message.into(),
        },
    )
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| bad_request("BAD_REQUEST", e.to_string()))
}

fn parse_id(id: &str) -> Result<Uuid, Response> {
    // An unparseable id names no session.
    Uuid::parse_str(id).map_err(|_| {
        json(
            StatusCode::NOT_FOUND,
            &ErrorBody {
                code: "UNKNOWN_SESSION".into(),
                message: format!("unknown session {id:?}"),
            },
        )
    })
}

async fn blocking<T: Send + 'static>(
    service: Shared,
    f: impl FnOnce(&GameService) -> T + Send + 'static,
) -> T {
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .expect("service call panicked")
}

async fn create_session(State(service): State<Shared>, body: Bytes) -> Response {
    let req: NewSession = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    match blocking(service, move |s| s.create_session(&req)).await {
        Ok(created) => json(StatusCode::CREATED, &created),
        Err(e) => error(e),
    }
}

async fn ingest(State(service): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let id = match parse_id(&id) {
        Ok(id) => id,
        Err(resp) => return resp,
    };
    let batch: IngestBatch = match parse_body(&body) {
        Ok(b) => b,
        Err(resp) => return resp,
    };
    match blocking(service, move |s| s.ingest(id, &batch.events)).await {
        Ok(result) => {
            let status = ingest_status(&result);
            json(status, &result)
        }
        Err(e) => error(e),
    }
}

fn ingest_status(r: &IngestResult) -> StatusCode {
    if r.rejected_from.is_some() {
        StatusCode::CONFLICT
    } else {
        StatusCode::OK
    }
}

async fn state(State(service): State<Shared>, Path(id): Path<String>) -> Response {
    let id = match parse_id(&id) {
        Ok(id) => id,
        Err(resp) => return resp,
    };
    match blocking(service, move |s| s.state(id)).await {
        Ok(view) => json(StatusCode::OK, &view),
        Err(e) => error(e),
    }
}

async fn blueprint(State(service): State<Shared>, Path(id): Path<String>) -> Response {
    let id = match parse_id(&id) {
        Ok(id) => id,
        Err(resp) => return resp,
    };
    match blocking(service, move |s| s.blueprint(id)).await {
        Ok(bp) => json(StatusCode::OK, &bp),
        Err(e) => error(e),
    }
}

async fn export(
    State(service): State<Shared>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let param = |name: &str, default: Option<&str>| {
        params
            .get(name)
            .map(String::as_str)
            .or(default)
            .map(str::to_owned)
            .ok_or_else(|| bad_request("BAD_REQUEST", format!("missing query parameter {name}")))
    };
    let parsed = (|| -> Result<(ExportKind, ExportFormat, ExportMode), Response> {
        let unsupported = |e: ExportError| error(ServiceError::Export(e));
        let kind = param("kind", None)?.parse().map_err(unsupported)?;
        let format = param("format", None)?.parse().map_err(unsupported)?;
        let mode = param("mode", Some("paper"))?.parse().map_err(unsupported)?;
        Ok((kind, format, mode))
    })();
    let (kind, format, mode) = match parsed {
        Ok(p) => p,
        Err(resp) => return resp,
    };
    let result = blocking(service, move |s| {
        let mut out = Vec::new();
        s.export(kind, format, mode, &mut out).map(|()| out)
    })
    .await;
    match result {
        Ok(bytes) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, format.content_type())],
            bytes,
        )
            .into_response(),
        Err(e) => error(e),
    }
}
