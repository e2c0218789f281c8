use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{contains, Detection, GateConfig, Label, Protection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// Protective symbol on an object.
    R1,
    /// White flag with a person.
    R2,
    /// Hands up, no weapon nearby.
    R3,
    /// Armed person later seen with hands up, separated from the weapon.
    R4,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFiring {
    pub rule: Option<Rule>,
    pub frames: Vec<u64>,
    pub detail: String,
}

impl RuleFiring {
    fn note(detail: &str) -> RuleFiring {
        RuleFiring { rule: None, frames: Vec::new(), detail: detail.to_owned() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Perceiver {
    Operator,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerceptionState {
    pub perceiver: Perceiver,
    pub assessment: Protection,
    pub rationale: Vec<RuleFiring>,
}

impl PerceptionState {
    /// An operator's judgement, taken as given.
    pub fn operator(assessment: Protection, note: impl Into<String>) -> PerceptionState {
        PerceptionState {
            perceiver: Perceiver::Operator,
            assessment,
            rationale: vec![RuleFiring { rule: None, frames: Vec::new(), detail: note.into() }],
        }
    }

    pub fn fired(&self, rule: Rule) -> bool {
        self.rationale.iter().any(|f| f.rule == Some(rule))
    }
}

fn name(label: Label) -> String {
    serde_json::to_value(label).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn gun_near(frame: &[&Detection], who: &Detection, radius: f64) -> bool {
    frame.iter().any(|g| g.label == Label::Gun && g.bbox.center_distance(&who.bbox) < radius)
}

/// Per-object surrender state: first frame seen armed, and whether the
/// surrender transition has been observed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrenderTracker {
    armed_since: BTreeMap<String, u64>,
    surrendered: BTreeMap<String, u64>,
}

impl SurrenderTracker {
    /// Feeds one frame; returns R4 firings completed by it.
    pub fn observe(&mut self, frame: &[&Detection], config: &GateConfig) -> Vec<RuleFiring> {
        let mut out = Vec::new();
        for d in frame.iter().filter(|d| d.label.is_person()) {
            let Some(id) = &d.object_id else { continue };
            if d.label == Label::Person && gun_near(frame, d, config.proximity) {
                self.armed_since.entry(id.clone()).or_insert(d.frame_id);
            }
            if d.label == Label::HandsUp && !gun_near(frame, d, config.separation) {
                if let Some(&armed) = self.armed_since.get(id) {
                    if armed < d.frame_id && !self.surrendered.contains_key(id) {
                        self.surrendered.insert(id.clone(), d.frame_id);
                        out.push(RuleFiring {
                            rule: Some(Rule::R4),
                            frames: vec![armed, d.frame_id],
                            detail: format!(
                                "{id} armed in frame {armed}, hands up and separated from weapon in frame {}",
                                d.frame_id
                            ),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Machine assessment of a time-ordered detection sequence. Detections below
/// the confidence threshold are ignored.
pub fn assess_protection(detections: &[Detection], config: &GateConfig) -> PerceptionState {
    let kept: Vec<&Detection> = detections.iter().filter(|d| d.confidence >= config.confidence_threshold).collect();
    if kept.is_empty() {
        return PerceptionState {
            perceiver: Perceiver::Machine,
            assessment: Protection::NotProtected,
            rationale: vec![RuleFiring::note("no detections")],
        };
    }
    let mut frames: BTreeMap<u64, Vec<&Detection>> = BTreeMap::new();
    for d in kept {
        frames.entry(d.frame_id).or_default().push(d);
    }

    let mut firings = Vec::new();
    let mut tracker = SurrenderTracker::default();
    for (&frame_id, frame) in &frames {
        for sym in frame.iter().filter(|d| d.label.is_symbol()) {
            if let Some(carrier) = frame.iter().find(|c| c.label.is_carrier() && contains(c, sym).unwrap_or(false)) {
                firings.push(RuleFiring {
                    rule: Some(Rule::R1),
                    frames: vec![frame_id],
                    detail: format!("{} on {}", name(sym.label), name(carrier.label)),
                });
            }
        }
        if frame.iter().any(|d| d.label == Label::WhiteFlag) && frame.iter().any(|d| d.label.is_person()) {
            firings.push(RuleFiring {
                rule: Some(Rule::R2),
                frames: vec![frame_id],
                detail: "white flag with person".into(),
            });
        }
        for h in frame.iter().filter(|d| d.label == Label::HandsUp) {
            if !gun_near(frame, h, config.proximity) {
                let who = h.object_id.as_deref().unwrap_or("person");
                firings.push(RuleFiring {
                    rule: Some(Rule::R3),
                    frames: vec![frame_id],
                    detail: format!("{who} hands up, no weapon nearby"),
                });
            }
        }
        firings.extend(tracker.observe(frame, config));
    }

    if firings.is_empty() {
        return PerceptionState {
            perceiver: Perceiver::Machine,
            assessment: Protection::NotProtected,
            rationale: vec![RuleFiring::note("no protection rule fired")],
        };
    }
    PerceptionState { perceiver: Perceiver::Machine, assessment: Protection::Protected, rationale: firings }
}
