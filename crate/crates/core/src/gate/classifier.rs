use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    assess_protection, parse_detection_stream, Detection, GateConfig, GateError, Perceiver, PerceptionState,
    Protection, RuleFiring,
};
use crate::crypto::Digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsOrigin {
    Verified,
    Unverified,
}

/// What a delivered model must declare: the algorithm and training data it
/// can be rebuilt from, and whether its initial weights are of verified origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelProvenance {
    pub model_id: String,
    pub algorithm_digest: Digest,
    pub training_data_digest: Digest,
    pub weights_origin: WeightsOrigin,
}

/// A source of labelled detections for a frame.
pub trait Classifier: Send {
    fn provenance(&self) -> &ModelProvenance;

    fn classify(&self, frame_id: u64) -> Vec<Detection>;
}

/// Replays detections recorded in a JSON-lines stream.
#[derive(Debug, Clone)]
pub struct ScriptedClassifier {
    provenance: ModelProvenance,
    frames: BTreeMap<u64, Vec<Detection>>,
}

impl ScriptedClassifier {
    pub fn new(provenance: ModelProvenance, detections: Vec<Detection>) -> Self {
        let mut frames: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
        for d in detections {
            frames.entry(d.frame_id).or_default().push(d);
        }
        ScriptedClassifier { provenance, frames }
    }

    pub fn from_jsonl(provenance: ModelProvenance, text: &str) -> Result<Self, GateError> {
        Ok(ScriptedClassifier::new(provenance, parse_detection_stream(text)?))
    }

    pub fn frame_ids(&self) -> Vec<u64> {
        self.frames.keys().copied().collect()
    }
}

impl Classifier for ScriptedClassifier {
    fn provenance(&self) -> &ModelProvenance {
        &self.provenance
    }

    fn classify(&self, frame_id: u64) -> Vec<Detection> {
        self.frames.get(&frame_id).cloned().unwrap_or_default()
    }
}

/// The protective gate around a classifier. Refuses models whose weights are
/// of unverified origin.
pub struct Gate {
    classifier: Box<dyn Classifier>,
    config: GateConfig,
}

impl std::fmt::Debug for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gate")
            .field("model", &self.classifier.provenance().model_id)
            .field("config", &self.config)
            .finish()
    }
}

impl Gate {
    pub fn new(classifier: Box<dyn Classifier>, config: GateConfig) -> Result<Gate, GateError> {
        let p = classifier.provenance();
        if p.weights_origin != WeightsOrigin::Verified {
            return Err(GateError::UnverifiedModel(p.model_id.clone()));
        }
        Ok(Gate { classifier, config })
    }

    pub fn config(&self) -> &GateConfig {
        &self.config
    }

    pub fn provenance(&self) -> &ModelProvenance {
        self.classifier.provenance()
    }

    /// Detections for the frames, in frame order.
    pub fn detect(&self, frame_ids: &[u64]) -> Vec<Detection> {
        let mut ids = frame_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().flat_map(|id| self.classifier.classify(id)).collect()
    }

    pub fn perceive(&self, frame_ids: &[u64]) -> PerceptionState {
        assess_protection(&self.detect(frame_ids), &self.config)
    }
}

/// Runs the gate over every frame of a recorded stream. A model that cannot be
/// vouched for never clears an engagement: the result is Protected with the
/// refusal as rationale and no detections.
pub fn perceive_stream(
    provenance: ModelProvenance,
    detections: Vec<Detection>,
    config: &GateConfig,
) -> (PerceptionState, Vec<Detection>) {
    let classifier = ScriptedClassifier::new(provenance, detections);
    let frames = classifier.frame_ids();
    match Gate::new(Box::new(classifier), config.clone()) {
        Ok(gate) => (gate.perceive(&frames), gate.detect(&frames)),
        Err(e) => (
            PerceptionState {
                perceiver: Perceiver::Machine,
                assessment: Protection::Protected,
                rationale: vec![RuleFiring { rule: None, frames: Vec::new(), detail: e.to_string() }],
            },
            Vec::new(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance(origin: WeightsOrigin) -> ModelProvenance {
        ModelProvenance {
            model_id: "frcnn-demo".into(),
            algorithm_digest: Digest::of(b"faster-rcnn"),
            training_data_digest: Digest::of(b"training set"),
            weights_origin: origin,
        }
    }

    #[test]
    fn unverified_weights_refused() {
        let c = ScriptedClassifier::new(provenance(WeightsOrigin::Unverified), Vec::new());
        assert!(matches!(Gate::new(Box::new(c), GateConfig::default()), Err(GateError::UnverifiedModel(_))));
    }

    #[test]
    fn scripted_frames() {
        let text = r#"{"frame_id": 1, "timestamp": "2026-01-01T00:00:00Z", "detections": [
            {"label": "person", "bbox": [0.1, 0.1, 0.4, 0.9], "confidence": 0.9},
            {"label": "white_flag", "bbox": [0.3, 0.05, 0.45, 0.2], "confidence": 0.8}]}"#
            .replace('\n', "");
        let c = ScriptedClassifier::from_jsonl(provenance(WeightsOrigin::Verified), &text).unwrap();
        assert_eq!(c.frame_ids(), vec![1]);
        let gate = Gate::new(Box::new(c), GateConfig::default()).unwrap();
        assert_eq!(gate.perceive(&[1]).assessment, super::super::Protection::Protected);
        assert!(gate.detect(&[2]).is_empty());
    }
}
