//! Common operational picture: ledger-backed, trust-fused tracks of protected
//! sites, infrastructure, threats and humanitarian assets, plus anonymisation of
//! civilian reports, evidence-threshold decision support and route risk.

mod anonymize;
mod build;
mod decision;
pub mod geo;
mod geojson;
mod routes;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::{CodecError, EffectiveState, GeoShape, MessageCategory, WfMessage};
use crate::crypto::Digest;
use crate::trust::{FusionTrace, Opinion, TrustError, DEFAULT_BASE_RATE};

pub use anonymize::{anonymize, laplace, Pseudonymizer};
pub use build::{build_picture, build_picture_from_messages};
pub use decision::{decision_support, evidence_threshold, Decision, DEFAULT_U_MAX};
pub use geojson::to_geojson;
pub use routes::{assess_routes, RiskAssessment, RouteOption, RouteRisk, ThreatContribution, DEFAULT_LAMBDA_KM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PictureError {
    #[error("message has no geometry")]
    MissingGeometry,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no routes to assess")]
    EmptyRoutes,
    #[error("route `{0}` needs at least two points")]
    InvalidRoute(String),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl PictureError {
    pub fn code(&self) -> &'static str {
        match self {
            PictureError::MissingGeometry => "MissingGeometry",
            PictureError::DomainError(_) => "DomainError",
            PictureError::EmptyRoutes => "EmptyRoutes",
            PictureError::InvalidRoute(_) => "InvalidRoute",
            PictureError::Trust(e) => e.code(),
            PictureError::Codec(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrackKind {
    ProtectedSite,
    CriticalInfrastructure,
    Threat,
    SurrenderEvent,
    HumanitarianAsset,
}

impl TrackKind {
    /// The kind of track a message contributes to, if any. Requests, resources
    /// and free text never form tracks.
    pub fn of(category: MessageCategory, subject: u8) -> Option<TrackKind> {
        use MessageCategory::*;
        Some(match (category, subject) {
            (ProtectiveSign, 1 | 2 | 5) => TrackKind::ProtectedSite,
            (ProtectiveSign, 3) | (EmergencySignal, 3) => TrackKind::SurrenderEvent,
            (ProtectiveSign, _) | (EmergencySignal, _) | (MissionSignal, _) => TrackKind::HumanitarianAsset,
            (StatusSignal, 3) | (InfrastructureSign, _) => TrackKind::CriticalInfrastructure,
            (StatusSignal, _) => TrackKind::HumanitarianAsset,
            (DangerSign, _) => TrackKind::Threat,
            (RequestSignal | ResourceMessage | FreeText, _) => return None,
        })
    }

    pub fn of_message(m: &WfMessage) -> Option<TrackKind> {
        TrackKind::of(m.category, m.subject_code)
    }

    /// Kinds whose presence argues that a location must not be engaged.
    pub fn is_protective(self) -> bool {
        matches!(self, TrackKind::ProtectedSite | TrackKind::HumanitarianAsset | TrackKind::SurrenderEvent)
    }
}

/// Threat severity per danger-sign subject code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityTable(pub BTreeMap<u8, f64>);

impl Default for SeverityTable {
    fn default() -> Self {
        SeverityTable(BTreeMap::from([(1, 0.8), (2, 0.9), (3, 0.5), (4, 1.0), (5, 0.6), (6, 0.6)]))
    }
}

impl SeverityTable {
    pub fn of(&self, subject: u8) -> f64 {
        self.0.get(&subject).copied().unwrap_or(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PictureConfig {
    pub merge_radius_m: f64,
    pub base_rate: f64,
    pub severity: SeverityTable,
}

impl Default for PictureConfig {
    fn default() -> Self {
        PictureConfig { merge_radius_m: 500.0, base_rate: DEFAULT_BASE_RATE, severity: SeverityTable::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTrack {
    pub track_id: String,
    pub kind: TrackKind,
    /// Subject name of the anchoring message.
    pub label: String,
    pub location: GeoShape,
    pub opinion: Opinion,
    pub expected: f64,
    /// Danger severity; only threat tracks carry one.
    pub severity: Option<f64>,
    pub contributing: BTreeSet<Digest>,
    pub last_update: DateTime<Utc>,
    pub status: EffectiveState,
    pub fusion: FusionTrace,
}

impl EntityTrack {
    pub fn position(&self) -> [f64; 2] {
        [self.location.latitude(), self.location.longitude()]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Picture {
    /// Block hash of the chain head the picture was built from.
    pub ledger_head: Option<Digest>,
    pub tracks: Vec<EntityTrack>,
}

impl Picture {
    pub fn track(&self, track_id: &str) -> Option<&EntityTrack> {
        self.tracks.iter().find(|t| t.track_id == track_id)
    }

    pub fn of_kind(&self, kind: TrackKind) -> impl Iterator<Item = &EntityTrack> {
        self.tracks.iter().filter(move |t| t.kind == kind)
    }

    /// Tracks of `kind` within `radius_km` of a point, nearest first.
    pub fn near(&self, point: [f64; 2], radius_km: f64, kind: Option<TrackKind>) -> Vec<(&EntityTrack, f64)> {
        let mut out: Vec<(&EntityTrack, f64)> = self
            .tracks
            .iter()
            .filter(|t| kind.is_none_or(|k| t.kind == k))
            .map(|t| (t, geo::distance_km(point, t.position())))
            .filter(|(_, d)| *d <= radius_km)
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.track_id.cmp(&b.0.track_id)));
        out
    }
}
