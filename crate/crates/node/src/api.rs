//! HTTP surface of a node.

use std::convert::Infallible;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use pause_core::crypto::Digest;
use pause_core::ledger::{AuditEvent, Block};
use pause_core::picture::{to_geojson, Picture, RiskAssessment};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::mpsc;
use tokio_stream::wrappers::ReceiverStream;
use tokio_stream::Stream;

use crate::error::ApiError;
use crate::session::{ApiSession, Operation};
use crate::state::{
    AppState, FeedbackRequest, NodeEvent, NodeStatus, PerceptRequest, PerceptResponse, SubmitRequest, SubmitResponse,
    SyncRequest, SyncResponse, TrustResponse, WhatIfRequest,
};

/// JSON body extractor whose rejections are problem documents.
pub struct Json<T>(pub T);

impl<S: Send + Sync, T: serde::de::DeserializeOwned> FromRequest<S> for Json<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match axum::Json::<T>::from_request(req, state).await {
            Ok(axum::Json(v)) => Ok(Json(v)),
            Err(e) => Err(rejection(e)),
        }
    }
}

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

fn rejection(e: JsonRejection) -> ApiError {
    let code = match e {
        JsonRejection::MissingJsonContentType(_) => "UnsupportedMediaType",
        JsonRejection::JsonSyntaxError(_) => "MalformedJson",
        _ => "InvalidBody",
    };
    ApiError::bad_request(code, e.body_text())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/node", get(status))
        .route("/messages", post(submit))
        .route("/picture", get(picture))
        .route("/ledger/blocks", get(blocks))
        .route("/audit/{digest}", get(audit))
        .route("/whatif/route", post(whatif))
        .route("/trust/{source_id}", post(trust))
        .route("/gate/percepts", post(percept))
        .route("/events", get(events))
        .route("/sync", post(sync))
        .fallback(|| async { ApiError::not_found("NotFound", "no such endpoint") })
        .with_state(state)
}

async fn status(State(node): State<AppState>, session: ApiSession) -> Result<Json<NodeStatus>, ApiError> {
    session.require(Operation::Read)?;
    Ok(Json(node.status()))
}

async fn submit(
    State(node): State<AppState>,
    session: ApiSession,
    Json(req): Json<SubmitRequest>,
) -> Result<(StatusCode, Json<SubmitResponse>), ApiError> {
    Ok((StatusCode::CREATED, Json(node.submit(&session, req)?)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PictureResponse {
    pub picture: Picture,
    pub geojson: serde_json::Value,
}

async fn picture(State(node): State<AppState>, session: ApiSession) -> Result<Json<PictureResponse>, ApiError> {
    session.require(Operation::Read)?;
    let snapshot = node.snapshot();
    let geojson = to_geojson(&snapshot.picture, &[], None);
    Ok(Json(PictureResponse { picture: snapshot.picture.clone(), geojson }))
}

#[derive(Debug, Deserialize)]
struct BlocksQuery {
    #[serde(default)]
    from: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlocksResponse {
    pub from: u64,
    /// Number of blocks in the whole chain.
    pub height: usize,
    pub blocks: Vec<Block>,
}

async fn blocks(
    State(node): State<AppState>,
    session: ApiSession,
    query: Result<Query<BlocksQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<BlocksResponse>, ApiError> {
    session.require(Operation::Read)?;
    let Query(q) = query.map_err(|e| ApiError::bad_request("InvalidQuery", e.body_text()))?;
    let blocks = node.blocks(q.from);
    let height = node.status().blocks;
    Ok(Json(BlocksResponse { from: q.from, height, blocks }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditResponse {
    pub digest: Digest,
    pub trail: Vec<AuditEvent>,
}

async fn audit(
    State(node): State<AppState>,
    session: ApiSession,
    Path(digest): Path<String>,
) -> Result<Json<AuditResponse>, ApiError> {
    session.require(Operation::Read)?;
    let digest: Digest = digest
        .parse()
        .map_err(|e: pause_core::crypto::ParseDigestError| ApiError::bad_request("InvalidDigest", e.to_string()))?;
    let trail = node.audit(&digest)?;
    Ok(Json(AuditResponse { digest, trail }))
}

async fn whatif(
    State(node): State<AppState>,
    session: ApiSession,
    Json(req): Json<WhatIfRequest>,
) -> Result<Json<RiskAssessment>, ApiError> {
    session.require(Operation::WhatIf)?;
    Ok(Json(node.whatif(&req)?))
}

async fn trust(
    State(node): State<AppState>,
    session: ApiSession,
    Path(source_id): Path<String>,
    Json(req): Json<FeedbackRequest>,
) -> Result<Json<TrustResponse>, ApiError> {
    Ok(Json(node.feedback(&session, &source_id, req.outcome)?))
}

async fn percept(
    State(node): State<AppState>,
    session: ApiSession,
    Json(req): Json<PerceptRequest>,
) -> Result<Json<PerceptResponse>, ApiError> {
    Ok(Json(node.perceive(&session, req)?))
}

async fn sync(
    State(node): State<AppState>,
    session: ApiSession,
    Json(req): Json<SyncRequest>,
) -> Result<Json<SyncResponse>, ApiError> {
    Ok(Json(node.exchange(&session, req)?))
}

fn sse_event(e: &NodeEvent) -> Event {
    Event::default().event(e.name()).data(serde_json::to_string(e).expect("event serializes"))
}

/// Forwards node events to one subscriber. A subscriber that falls behind the
/// bounded queue gets a gap marker and is disconnected; the writer never waits.
pub fn event_stream(node: &AppState) -> impl Stream<Item = Result<Event, Infallible>> {
    let mut rx = node.subscribe();
    let (tx, out) = mpsc::channel(node.config().event_buffer);
    tokio::spawn(async move {
        loop {
            match rx.recv().await {
                Ok(e) => {
                    if tx.send(Ok(sse_event(&e))).await.is_err() {
                        break;
                    }
                }
                Err(RecvError::Lagged(missed)) => {
                    let _ = tx.send(Ok(sse_event(&NodeEvent::Gap { missed }))).await;
                    break;
                }
                Err(RecvError::Closed) => break,
            }
        }
    });
    ReceiverStream::new(out)
}

async fn events(
    State(node): State<AppState>,
    session: ApiSession,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    session.require(Operation::Read)?;
    Ok(Sse::new(event_stream(&node)).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))))
}
