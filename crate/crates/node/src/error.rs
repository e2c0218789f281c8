use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use pause_core::codec::CodecError;
use pause_core::gate::GateError;
use pause_core::ledger::LedgerError;
use pause_core::picture::PictureError;
use serde::{Deserialize, Serialize};

/// JSON problem document returned for every failed request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(rename = "type")]
    pub kind: String,
    pub title: String,
    pub status: u16,
    /// Machine-readable error code.
    pub code: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, detail: impl Into<String>) -> ApiError {
        ApiError { status, code: code.into(), detail: detail.into() }
    }

    pub fn bad_request(code: impl Into<String>, detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, code, detail)
    }

    pub fn forbidden(detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::FORBIDDEN, "Forbidden", detail)
    }

    pub fn not_found(code: impl Into<String>, detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, code, detail)
    }

    pub fn internal(detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", detail)
    }

    pub fn with_code(mut self, code: impl Into<String>) -> ApiError {
        self.code = code.into();
        self
    }

    pub fn problem(&self) -> Problem {
        Problem {
            kind: format!("urn:pause:problem:{}", self.code),
            title: self.status.canonical_reason().unwrap_or("Error").to_owned(),
            status: self.status.as_u16(),
            code: self.code.clone(),
            detail: self.detail.clone(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_vec(&self.problem()).expect("problem serializes");
        (self.status, [(header::CONTENT_TYPE, "application/problem+json")], body).into_response()
    }
}

impl From<CodecError> for ApiError {
    fn from(e: CodecError) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

impl From<PictureError> for ApiError {
    fn from(e: PictureError) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

impl From<GateError> for ApiError {
    fn from(e: GateError) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        let status = match e {
            LedgerError::RejectedSignature(_) => StatusCode::UNAUTHORIZED,
            LedgerError::UnknownDigest(_) => StatusCode::NOT_FOUND,
            LedgerError::PeerQuarantined(_) => StatusCode::FORBIDDEN,
            LedgerError::InvalidPeerChain { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            LedgerError::LinkDown(_) => StatusCode::SERVICE_UNAVAILABLE,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}
