use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{contains, Detection, GateConfig, PerceptionState, Protection};
use crate::codec::{MessageCategory, WfMessage};
use crate::picture::{Picture, TrackKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConflictCode {
    /// Protective symbol on a military silhouette.
    C1,
    /// Machine sees protection the picture does not support, near a threat.
    C2,
    /// Machine sees no protection where the picture holds a protected site.
    C3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictReason {
    pub code: ConflictCode,
    pub detail: String,
    #[serde(default)]
    pub frames: Vec<u64>,
    #[serde(default)]
    pub tracks: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Review {
    /// Deliberate human review before any decision.
    TypeII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum CrossCheck {
    Consistent,
    Conflict { reasons: Vec<ConflictReason>, review: Review },
}

impl CrossCheck {
    pub fn is_conflict(&self) -> bool {
        matches!(self, CrossCheck::Conflict { .. })
    }

    pub fn codes(&self) -> Vec<ConflictCode> {
        match self {
            CrossCheck::Consistent => Vec::new(),
            CrossCheck::Conflict { reasons, .. } => reasons.iter().map(|r| r.code).collect(),
        }
    }
}

/// Checks a machine percept against the detections themselves and against
/// the operational picture around `location` (`[latitude, longitude]`).
pub fn cross_check(
    machine: &PerceptionState,
    detections: &[Detection],
    picture: &Picture,
    location: [f64; 2],
    config: &GateConfig,
) -> CrossCheck {
    let mut reasons = Vec::new();
    let kept: Vec<&Detection> = detections.iter().filter(|d| d.confidence >= config.confidence_threshold).collect();

    let mut c1_frames: Vec<u64> = kept
        .iter()
        .filter(|s| s.label.is_symbol())
        .filter(|s| kept.iter().any(|t| t.label.is_military_silhouette() && contains(t, s).unwrap_or(false)))
        .map(|s| s.frame_id)
        .collect();
    c1_frames.dedup();
    if !c1_frames.is_empty() {
        reasons.push(ConflictReason {
            code: ConflictCode::C1,
            detail: "protective symbol on a tank silhouette".into(),
            frames: c1_frames,
            tracks: Vec::new(),
        });
    }

    let nearby = picture.near(location, config.radius_km, None);
    match machine.assessment {
        Protection::Protected => {
            let supported = nearby.iter().any(|(t, _)| {
                matches!(t.kind, TrackKind::ProtectedSite | TrackKind::HumanitarianAsset)
                    && t.expected >= config.support_expected
            });
            let threats: Vec<String> =
                nearby.iter().filter(|(t, _)| t.kind == TrackKind::Threat).map(|(t, _)| t.track_id.clone()).collect();
            if !supported && !threats.is_empty() {
                reasons.push(ConflictReason {
                    code: ConflictCode::C2,
                    detail: "no protected or humanitarian track supports the percept; threat tracks nearby".into(),
                    frames: Vec::new(),
                    tracks: threats,
                });
            }
        }
        Protection::NotProtected => {
            let sites: Vec<String> = nearby
                .iter()
                .filter(|(t, _)| t.kind == TrackKind::ProtectedSite && t.expected >= config.protected_expected)
                .map(|(t, _)| t.track_id.clone())
                .collect();
            if !sites.is_empty() {
                reasons.push(ConflictReason {
                    code: ConflictCode::C3,
                    detail: "protected site on record at this location".into(),
                    frames: Vec::new(),
                    tracks: sites,
                });
            }
        }
    }

    if reasons.is_empty() {
        CrossCheck::Consistent
    } else {
        CrossCheck::Conflict { reasons, review: Review::TypeII }
    }
}

/// A free-text conflict-evidence message recording a cross-check conflict,
/// or `None` when the check was consistent.
pub fn evidence_message(
    originator_id: &str,
    check: &CrossCheck,
    location: [f64; 2],
    timestamp: DateTime<Utc>,
) -> Option<WfMessage> {
    let CrossCheck::Conflict { reasons, .. } = check else { return None };
    let text = serde_json::to_string(&serde_json::json!({ "conflict": reasons })).expect("reasons serialize");
    Some(
        WfMessage::new(originator_id, MessageCategory::FreeText, 2, timestamp)
            .at(location[0], location[1], 100)
            .with_text(text),
    )
}
