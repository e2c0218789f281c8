use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::GateError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Tent,
    Truck,
    Tank,
    Person,
    Gun,
    RedCross,
    RedCrescent,
    WhiteFlag,
    HandsUp,
}

impl Label {
    pub fn is_symbol(self) -> bool {
        matches!(self, Label::RedCross | Label::RedCrescent)
    }

    /// Objects a protective symbol can be painted on.
    pub fn is_carrier(self) -> bool {
        matches!(self, Label::Tent | Label::Truck | Label::Tank | Label::Person)
    }

    pub fn is_military_silhouette(self) -> bool {
        self == Label::Tank
    }

    /// Labels whose presence can only add protection.
    pub fn is_protective(self) -> bool {
        matches!(self, Label::RedCross | Label::RedCrescent | Label::WhiteFlag | Label::HandsUp)
    }

    pub fn is_person(self) -> bool {
        matches!(self, Label::Person | Label::HandsUp)
    }
}

/// Axis-aligned box in normalised image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<BBox, GateError> {
        let b = BBox { x_min, y_min, x_max, y_max };
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if ![x_min, y_min, x_max, y_max].into_iter().all(unit) || x_min >= x_max || y_min >= y_max {
            return Err(GateError::MalformedBox([x_min, y_min, x_max, y_max]));
        }
        Ok(b)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        w * h
    }

    pub fn center(&self) -> [f64; 2] {
        [(self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0]
    }

    pub fn center_distance(&self, other: &BBox) -> f64 {
        let (a, b) = (self.center(), other.center());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = GateError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: Label,
    pub bbox: BBox,
    pub confidence: f64,
    pub frame_id: u64,
    pub timestamp: DateTime<Utc>,
    /// Tracker identity across frames, when the detector provides one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<String>,
}

/// Fraction of `inner`'s area needed inside `outer` for containment.
pub const CONTAINMENT_FRACTION: f64 = 0.9;

/// True iff at least 90% of `inner`'s area lies within `outer`.
pub fn contains(outer: &Detection, inner: &Detection) -> Result<bool, GateError> {
    if outer.frame_id != inner.frame_id {
        return Err(GateError::FrameMismatch(outer.frame_id, inner.frame_id));
    }
    Ok(outer.bbox.intersection_area(&inner.bbox) >= CONTAINMENT_FRACTION * inner.bbox.area())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FrameDetection {
    label: Label,
    bbox: BBox,
    confidence: f64,
    #[serde(default)]
    object_id: Option<String>,
}

/// One line of a detection stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FrameLine {
    frame_id: u64,
    timestamp: DateTime<Utc>,
    #[serde(default)]
    detections: Vec<FrameDetection>,
}

/// Parses a JSON-lines detection stream, one frame per line. Blank lines are
/// skipped; detections come back ordered by frame.
pub fn parse_detection_stream(text: &str) -> Result<Vec<Detection>, GateError> {
    let mut frames: BTreeMap<u64, FrameLine> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: FrameLine =
            serde_json::from_str(line).map_err(|e| GateError::Stream { line: i + 1, reason: e.to_string() })?;
        if f.detections.iter().any(|d| !(0.0..=1.0).contains(&d.confidence)) {
            return Err(GateError::Stream { line: i + 1, reason: "confidence outside [0, 1]".into() });
        }
        if frames.insert(f.frame_id, f).is_some() {
            return Err(GateError::Stream { line: i + 1, reason: "duplicate frame_id".into() });
        }
    }
    Ok(frames
        .into_values()
        .flat_map(|f| {
            f.detections.into_iter().map(move |d| Detection {
                label: d.label,
                bbox: d.bbox,
                confidence: d.confidence,
                frame_id: f.frame_id,
                timestamp: f.timestamp,
                object_id: d.object_id,
            })
        })
        .collect())
}

/// Serializes detections as a JSON-lines stream, one frame per line.
pub fn write_detection_stream(detections: &[Detection]) -> String {
    let mut frames: BTreeMap<u64, FrameLine> = BTreeMap::new();
    for d in detections {
        frames
            .entry(d.frame_id)
            .or_insert_with(|| FrameLine { frame_id: d.frame_id, timestamp: d.timestamp, detections: Vec::new() })
            .detections
            .push(FrameDetection {
                label: d.label,
                bbox: d.bbox,
                confidence: d.confidence,
                object_id: d.object_id.clone(),
            });
    }
    frames.values().map(|f| serde_json::to_string(f).expect("frame serializes") + "\n").collect()
}
