//! Static per-request sessions taken from request headers.

use axum::extract::FromRequestParts;
use axum::http::request::Parts;
use pause_core::scenario::Role;
use serde::Serialize;

use crate::error::ApiError;
use crate::state::AppState;

pub const CLIENT_HEADER: &str = "x-pause-client";
pub const ROLE_HEADER: &str = "x-pause-role";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    /// Picture, ledger, audit and event stream reads.
    Read,
    /// Message submission.
    Submit,
    /// What-if route analysis.
    WhatIf,
    /// Source trust feedback.
    Tune,
    /// Gate percepts and engagement resolution.
    Perceive,
    /// Peer chain exchange.
    Sync,
}

impl Operation {
    pub fn permitted(role: Role) -> &'static [Operation] {
        use Operation::*;
        match role {
            Role::Military | Role::Humanitarian | Role::Icrc => &[Read, Submit, WhatIf, Tune, Perceive, Sync],
            Role::Observer => &[Read, WhatIf, Sync],
            Role::CivilianRelay => &[Submit],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiSession {
    pub client_id: String,
    pub role: Role,
}

impl ApiSession {
    pub fn permits(&self, op: Operation) -> bool {
        Operation::permitted(self.role).contains(&op)
    }

    pub fn require(&self, op: Operation) -> Result<(), ApiError> {
        if self.permits(op) {
            Ok(())
        } else {
            Err(ApiError::forbidden(format!("role {} may not perform {op:?}", self.role)))
        }
    }

    /// Civilian relay submissions are anonymized by the node before append.
    pub fn anonymizes(&self) -> bool {
        self.role == Role::CivilianRelay
    }
}

impl FromRequestParts<AppState> for ApiSession {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let text = |name: &str| -> Result<Option<String>, ApiError> {
            parts
                .headers
                .get(name)
                .map(|v| {
                    v.to_str()
                        .map(str::to_owned)
                        .map_err(|_| ApiError::bad_request("InvalidHeader", format!("{name} is not text")))
                })
                .transpose()
        };
        let client_id = text(CLIENT_HEADER)?.unwrap_or_else(|| "anonymous".into());
        let role = match text(ROLE_HEADER)? {
            Some(r) => r.parse().map_err(|e: String| ApiError::bad_request("InvalidRole", e))?,
            None => state.role(),
        };
        Ok(ApiSession { client_id, role })
    }
}
