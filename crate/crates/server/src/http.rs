//! HTTP front end.
//!
//! | route | |
//! |---|---|
//! | `GET /health` | liveness, seq and digest; no token needed |
//! | `GET /topology` | the topology document replicas check out against |
//! | `GET /snapshot` | full state at the current seq |
//! | `POST /command` | 200 accepted, 403 authorization, 422 validation |
//! | `GET /deltas?from=<seq>` | NDJSON delta stream, stays open |
//! | `GET /view?tick=<n>` | derived layers and the menu window |

use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bigboard_core::command::Command;
use bigboard_core::journal::RejectClass;
use bigboard_core::sequencer::Outcome;
use serde::Deserialize;

use crate::board::{Access, Board};
use crate::protocol::{ErrorBody, ErrorClass, WireError};

pub const NDJSON: &str = "application/x-ndjson";

pub fn router(board: Arc<Board>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/topology", get(topology))
        .route("/snapshot", get(snapshot))
        .route("/command", post(command))
        .route("/deltas", get(deltas))
        .route("/view", get(view))
        .with_state(board)
}

struct ApiError(StatusCode, WireError);

impl From<WireError> for ApiError {
    fn from(e: WireError) -> Self {
        let status = match e.class {
            ErrorClass::Unauthenticated => StatusCode::UNAUTHORIZED,
            ErrorClass::Malformed => StatusCode::BAD_REQUEST,
            ErrorClass::Forbidden => StatusCode::FORBIDDEN,
            ErrorClass::Future => StatusCode::CONFLICT,
            ErrorClass::Expired => StatusCode::GONE,
            ErrorClass::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
        };
        Self(status, e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

fn access(board: &Board, headers: &HeaderMap) -> Result<Access, ApiError> {
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(|| WireError::new(ErrorClass::Unauthenticated, "missing bearer token"))?;
    board
        .authenticate(token.trim())
        .ok_or_else(|| WireError::new(ErrorClass::Unauthenticated, "unknown token").into())
}

async fn health(State(board): State<Arc<Board>>) -> Response {
    Json(board.health()).into_response()
}

async fn topology(State(board): State<Arc<Board>>, headers: HeaderMap) -> Result<Response, ApiError> {
    access(&board, &headers)?;
    let body = board.topology().to_document_string();
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn snapshot(State(board): State<Arc<Board>>, headers: HeaderMap) -> Result<Response, ApiError> {
    access(&board, &headers)?;
    let snap = tokio::task::spawn_blocking(move || board.checkout())
        .await
        .expect("checkout task");
    Ok(Json(snap).into_response())
}

async fn command(State(board): State<Arc<Board>>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let who = access(&board, &headers)?;
    let cmd: Command = serde_json::from_slice(&body)
        .map_err(|e| WireError::new(ErrorClass::Malformed, format!("command record: {e}")))?;
    let outcome = tokio::task::spawn_blocking(move || board.submit(who, cmd))
        .await
        .expect("submit task")?;
    let status = match &outcome {
        Outcome::Accepted { .. } => StatusCode::OK,
        Outcome::Rejected { reason } => match reason.class {
            RejectClass::Authorization => StatusCode::FORBIDDEN,
            RejectClass::Validation => StatusCode::UNPROCESSABLE_ENTITY,
        },
    };
    Ok((status, Json(outcome)).into_response())
}

#[derive(Deserialize)]
struct FromSeq {
    #[serde(default)]
    from: u64,
}

async fn deltas(
    State(board): State<Arc<Board>>,
    headers: HeaderMap,
    Query(q): Query<FromSeq>,
) -> Result<Response, ApiError> {
    access(&board, &headers)?;
    let sub = board.subscribe(q.from)?;
    let stream = futures::stream::unfold(Some(sub), |sub| async move {
        let mut sub = sub?;
        match sub.next().await? {
            Ok(item) => {
                let mut line = Vec::with_capacity(item.line.len() + 1);
                line.extend_from_slice(item.line.as_bytes());
                line.push(b'\n');
                Some((Ok::<_, std::convert::Infallible>(Bytes::from(line)), Some(sub)))
            }
            // the feed ends with one error record the client can act on
            Err(e) => {
                let line = serde_json::to_string(&ErrorBody { error: e }).expect("error body") + "\n";
                Some((Ok(Bytes::from(line)), None))
            }
        }
    });
    Ok(([(header::CONTENT_TYPE, NDJSON)], Body::from_stream(stream)).into_response())
}

#[derive(Deserialize)]
struct Tick {
    tick: Option<u64>,
}

async fn view(
    State(board): State<Arc<Board>>,
    headers: HeaderMap,
    Query(q): Query<Tick>,
) -> Result<Response, ApiError> {
    access(&board, &headers)?;
    let v = tokio::task::spawn_blocking(move || board.view(q.tick))
        .await
        .expect("view task");
    Ok(Json(v).into_response())
}
