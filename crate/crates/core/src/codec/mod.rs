//! Humanitarian message model: the nine functional categories, canonical
//! encoding, signed (optionally encrypted) envelopes and reference resolution.

mod encoding;
mod envelope;
mod references;
mod subjects;

use std::fmt;

use chrono::{DateTime, Datelike, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::crypto::Digest;

pub use encoding::{decode, digest_of, encode, UNIT_SEPARATOR};
pub use envelope::{
    open, seal, seal_signed, verify, verify_with, Envelope, OpenError, SigningKeys, VerificationReport,
};
pub use references::{resolve_references, Chain, DanglingReference, EffectiveState, ReferenceReport};
pub use subjects::{subject, subjects_for, Subject, SUBJECTS};

pub const PROTOCOL_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("invariant violation in `{field}`: {reason}")]
    InvariantViolation { field: &'static str, reason: String },
    #[error("malformed bytes: {0}")]
    MalformedBytes(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("field `{field}` out of range: {value}")]
    FieldOutOfRange { field: &'static str, value: String },
    #[error("no signing key for originator `{0}`")]
    UnknownKey(String),
}

impl CodecError {
    pub(crate) fn invariant(field: &'static str, reason: impl Into<String>) -> Self {
        CodecError::InvariantViolation { field, reason: reason.into() }
    }

    /// Stable machine-readable code for API problem documents.
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::InvariantViolation { .. } => "InvariantViolation",
            CodecError::MalformedBytes(_) => "MalformedBytes",
            CodecError::UnknownCategory(_) => "UnknownCategory",
            CodecError::FieldOutOfRange { .. } => "FieldOutOfRange",
            CodecError::UnknownKey(_) => "UnknownKey",
        }
    }
}

/// Functional message categories, each with a unique one-letter wire code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageCategory {
    ProtectiveSign,
    EmergencySignal,
    DangerSign,
    StatusSignal,
    InfrastructureSign,
    MissionSignal,
    RequestSignal,
    ResourceMessage,
    FreeText,
}

impl MessageCategory {
    pub const ALL: [MessageCategory; 9] = [
        MessageCategory::ProtectiveSign,
        MessageCategory::EmergencySignal,
        MessageCategory::DangerSign,
        MessageCategory::StatusSignal,
        MessageCategory::InfrastructureSign,
        MessageCategory::MissionSignal,
        MessageCategory::RequestSignal,
        MessageCategory::ResourceMessage,
        MessageCategory::FreeText,
    ];

    pub fn code(self) -> char {
        match self {
            MessageCategory::ProtectiveSign => 'P',
            MessageCategory::EmergencySignal => 'E',
            MessageCategory::DangerSign => 'D',
            MessageCategory::StatusSignal => 'S',
            MessageCategory::InfrastructureSign => 'I',
            MessageCategory::MissionSignal => 'M',
            MessageCategory::RequestSignal => 'Q',
            MessageCategory::ResourceMessage => 'R',
            MessageCategory::FreeText => 'F',
        }
    }

    pub fn from_code(c: char) -> Option<MessageCategory> {
        Self::ALL.into_iter().find(|cat| cat.code() == c)
    }

    /// Categories that carry a text payload instead of (or in addition to) a sign.
    pub fn carries_text(self) -> bool {
        matches!(self, MessageCategory::ResourceMessage | MessageCategory::FreeText)
    }

    pub fn allows_duress(self) -> bool {
        matches!(self, MessageCategory::EmergencySignal | MessageCategory::StatusSignal)
    }

    pub fn description(self) -> &'static str {
        match self {
            MessageCategory::ProtectiveSign => "Signs to mark objects under the protection of international law",
            MessageCategory::EmergencySignal => "Signals to send an emergency signal when in need of assistance",
            MessageCategory::DangerSign => "Signs to mark a location or area of imminent danger",
            MessageCategory::StatusSignal => "Signals to provide the status of an object, or proof of life",
            MessageCategory::InfrastructureSign => "Signs to mark critical infrastructure",
            MessageCategory::MissionSignal => {
                "Signals to provide information on activities undertaken during a mission"
            }
            MessageCategory::RequestSignal => "Signals to perform requests to other parties",
            MessageCategory::ResourceMessage => "Messages to point to an internet resource with additional information",
            MessageCategory::FreeText => "Messages to send a free text string to clarify other messages",
        }
    }
}

impl fmt::Display for MessageCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RefIndicator {
    New,
    Update,
    Cancel,
    Acknowledge,
    Duress,
}

impl RefIndicator {
    pub const ALL: [RefIndicator; 5] = [
        RefIndicator::New,
        RefIndicator::Update,
        RefIndicator::Cancel,
        RefIndicator::Acknowledge,
        RefIndicator::Duress,
    ];

    pub fn code(self) -> char {
        match self {
            RefIndicator::New => 'N',
            RefIndicator::Update => 'U',
            RefIndicator::Cancel => 'C',
            RefIndicator::Acknowledge => 'A',
            RefIndicator::Duress => 'D',
        }
    }

    pub fn from_code(c: char) -> Option<RefIndicator> {
        Self::ALL.into_iter().find(|r| r.code() == c)
    }
}

/// A circular area. Coordinates are held as fixed-point 1e-5 degrees so the
/// canonical encoding round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeoShape {
    lat_e5: i32,
    lon_e5: i32,
    pub radius_m: u32,
}

pub(crate) const GEO_SCALE: f64 = 100_000.0;

impl GeoShape {
    /// Rounds to the nearest 1e-5 degree. Out-of-range values are kept so that
    /// validation can report them.
    pub fn new(latitude: f64, longitude: f64, radius_m: u32) -> GeoShape {
        GeoShape {
            lat_e5: (latitude * GEO_SCALE).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32,
            lon_e5: (longitude * GEO_SCALE).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32,
            radius_m,
        }
    }

    pub fn from_fixed(lat_e5: i32, lon_e5: i32, radius_m: u32) -> GeoShape {
        GeoShape { lat_e5, lon_e5, radius_m }
    }

    pub fn latitude(&self) -> f64 {
        self.lat_e5 as f64 / GEO_SCALE
    }

    pub fn longitude(&self) -> f64 {
        self.lon_e5 as f64 / GEO_SCALE
    }

    pub fn lat_e5(&self) -> i32 {
        self.lat_e5
    }

    pub fn lon_e5(&self) -> i32 {
        self.lon_e5
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if !(-90 * 100_000..=90 * 100_000).contains(&self.lat_e5) {
            return Err(CodecError::FieldOutOfRange { field: "latitude", value: format!("{}", self.latitude()) });
        }
        if !(-180 * 100_000..=180 * 100_000).contains(&self.lon_e5) {
            return Err(CodecError::FieldOutOfRange { field: "longitude", value: format!("{}", self.longitude()) });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GeoShapeJson {
    latitude: f64,
    longitude: f64,
    radius_m: u32,
}

impl Serialize for GeoShape {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GeoShapeJson { latitude: self.latitude(), longitude: self.longitude(), radius_m: self.radius_m }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeoShape {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let g = GeoShapeJson::deserialize(d)?;
        if !g.latitude.is_finite() || !g.longitude.is_finite() {
            return Err(serde::de::Error::custom("non-finite coordinate"));
        }
        Ok(GeoShape::new(g.latitude, g.longitude, g.radius_m))
    }
}

/// One humanitarian protocol message.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WfMessage {
    pub version: u8,
    pub originator_id: String,
    pub category: MessageCategory,
    pub subject_code: u8,
    pub reference_indicator: RefIndicator,
    #[serde(default)]
    pub referenced_hash: Option<Digest>,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub duration: Option<u32>,
    #[serde(default)]
    pub geometry: Option<GeoShape>,
    #[serde(default)]
    pub payload_text: Option<String>,
}

impl WfMessage {
    /// A new (non-referencing) message with no geometry or payload.
    pub fn new(
        originator_id: impl Into<String>,
        category: MessageCategory,
        subject_code: u8,
        timestamp: DateTime<Utc>,
    ) -> WfMessage {
        WfMessage {
            version: PROTOCOL_VERSION,
            originator_id: originator_id.into(),
            category,
            subject_code,
            reference_indicator: RefIndicator::New,
            referenced_hash: None,
            timestamp,
            duration: None,
            geometry: None,
            payload_text: None,
        }
    }

    pub fn at(mut self, latitude: f64, longitude: f64, radius_m: u32) -> Self {
        self.geometry = Some(GeoShape::new(latitude, longitude, radius_m));
        self
    }

    pub fn referencing(mut self, indicator: RefIndicator, target: Digest) -> Self {
        self.reference_indicator = indicator;
        self.referenced_hash = Some(target);
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.payload_text = Some(text.into());
        self
    }

    pub fn with_duration(mut self, seconds: u32) -> Self {
        self.duration = Some(seconds);
        self
    }

    pub fn digest(&self) -> Result<Digest, CodecError> {
        digest_of(self)
    }

    pub fn subject(&self) -> Option<&'static Subject> {
        subject(self.category, self.subject_code)
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.version != PROTOCOL_VERSION {
            return Err(CodecError::FieldOutOfRange { field: "version", value: self.version.to_string() });
        }
        if self.originator_id.is_empty() {
            return Err(CodecError::invariant("originator_id", "must not be empty"));
        }
        if self.originator_id.chars().any(char::is_control) {
            return Err(CodecError::invariant("originator_id", "must not contain control characters"));
        }
        if subject(self.category, self.subject_code).is_none() {
            return Err(CodecError::FieldOutOfRange {
                field: "subject_code",
                value: format!("{}-{:02}", self.category.code(), self.subject_code),
            });
        }
        match (self.reference_indicator, self.referenced_hash) {
            (RefIndicator::New, Some(_)) => {
                return Err(CodecError::invariant("referenced_hash", "must be absent on a New message"))
            }
            (r, None) if r != RefIndicator::New => {
                return Err(CodecError::invariant("referenced_hash", "required when reference_indicator is not New"))
            }
            _ => {}
        }
        if self.reference_indicator == RefIndicator::Duress && !self.category.allows_duress() {
            return Err(CodecError::invariant(
                "reference_indicator",
                format!("Duress is only valid on categories E and S, not {}", self.category.code()),
            ));
        }
        if self.timestamp.nanosecond() != 0 {
            return Err(CodecError::invariant("timestamp", "must have whole-second resolution"));
        }
        if !(1..=9999).contains(&self.timestamp.year()) {
            return Err(CodecError::FieldOutOfRange { field: "timestamp", value: self.timestamp.to_string() });
        }
        if let Some(g) = &self.geometry {
            g.validate()?;
        }
        match (&self.payload_text, self.category.carries_text()) {
            (Some(_), false) => {
                return Err(CodecError::invariant("payload_text", "only Resource and Free Text messages carry text"))
            }
            (None, true) => {
                return Err(CodecError::invariant("payload_text", "required for Resource and Free Text messages"))
            }
            (Some(t), true) if t.contains(UNIT_SEPARATOR as char) => {
                return Err(CodecError::invariant("payload_text", "must not contain the unit separator"))
            }
            _ => {}
        }
        Ok(())
    }
}
