//! Minimally-just protective gate: rule-based protection assessment over
//! labelled detections, operator-versus-machine engagement resolution, and
//! cross-checks of machine percepts against the operational picture.
//!
//! The gate only ever decides that something must not be engaged. It never
//! selects targets.

mod classifier;
mod crosscheck;
mod detection;
mod engagement;
mod rules;

use serde::{Deserialize, Serialize};

pub use classifier::{perceive_stream, Classifier, Gate, ModelProvenance, ScriptedClassifier, WeightsOrigin};
pub use crosscheck::{cross_check, evidence_message, ConflictCode, ConflictReason, CrossCheck, Review};
pub use detection::{
    contains, parse_detection_stream, write_detection_stream, BBox, Detection, Label, CONTAINMENT_FRACTION,
};
pub use engagement::{resolve_engagement, EngagementCase, ENGAGEMENT_TABLE};
pub use rules::{assess_protection, Perceiver, PerceptionState, Rule, RuleFiring, SurrenderTracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protection {
    Protected,
    NotProtected,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GateError {
    #[error("detections from different frames ({0} and {1})")]
    FrameMismatch(u64, u64),
    #[error("malformed bounding box {0:?}")]
    MalformedBox([f64; 4]),
    #[error("detection stream line {line}: {reason}")]
    Stream { line: usize, reason: String },
    #[error("model `{0}` has weights of unverified origin")]
    UnverifiedModel(String),
}

impl GateError {
    pub fn code(&self) -> &'static str {
        match self {
            GateError::FrameMismatch(..) => "FrameMismatch",
            GateError::MalformedBox(_) => "MalformedBox",
            GateError::Stream { .. } => "Stream",
            GateError::UnverifiedModel(_) => "UnverifiedModel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateConfig {
    /// Detections below this confidence are ignored.
    pub confidence_threshold: f64,
    /// Hands-up and gun closer than this (box centres, normalised units) are together.
    pub proximity: f64,
    /// Minimum hands-up to gun distance for a completed surrender.
    pub separation: f64,
    /// Cross-check search radius around the percept location.
    pub radius_km: f64,
    /// Minimum E of a protected or humanitarian track to support a Protected percept.
    pub support_expected: f64,
    /// Minimum E of a protected-site track that contradicts a NotProtected percept.
    pub protected_expected: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            confidence_threshold: 0.5,
            proximity: 0.15,
            separation: 0.15,
            radius_km: 1.0,
            support_expected: 0.5,
            protected_expected: 0.8,
        }
    }
}
