use serde::{Deserialize, Serialize};

use super::{engine, LinkState, Scenario, ScenarioError};
use crate::codec::EffectiveState;
use crate::crypto::Digest;
use crate::gate::{CrossCheck, EngagementCase, PerceptionState};
use crate::ledger::AuditEvent;
use crate::picture::{Decision, EntityTrack, RiskAssessment, TrackKind};
use crate::trust::{Opinion, Outcome};

/// Compact view of a track as logged after each fusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub track_id: String,
    pub kind: TrackKind,
    pub label: String,
    /// `[latitude, longitude]`.
    pub location: [f64; 2],
    pub opinion: Opinion,
    pub expected: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<f64>,
    pub status: EffectiveState,
    pub contributing: Vec<Digest>,
}

impl From<&EntityTrack> for TrackSummary {
    fn from(t: &EntityTrack) -> Self {
        TrackSummary {
            track_id: t.track_id.clone(),
            kind: t.kind,
            label: t.label.clone(),
            location: t.position(),
            opinion: t.opinion,
            expected: t.expected,
            severity: t.severity,
            status: t.status,
            contributing: t.contributing.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Record {
    Append {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        digest: Digest,
        entry_id: Digest,
        originator: String,
        sign: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        references: Option<Digest>,
        anonymized: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
    },
    Rejected {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        code: String,
        detail: String,
    },
    Link {
        a: String,
        b: String,
        state: LinkState,
    },
    Sync {
        a: String,
        b: String,
        entries: usize,
        head: Option<Digest>,
    },
    SyncRefused {
        a: String,
        b: String,
        detail: String,
    },
    TrackUpdate {
        node: String,
        track: TrackSummary,
    },
    TrackRemoved {
        node: String,
        track_id: String,
    },
    Feedback {
        source: String,
        outcome: Outcome,
        trust: f64,
    },
    Percept {
        node: String,
        label: String,
        model: String,
        machine: PerceptionState,
    },
    CrossCheck {
        node: String,
        label: String,
        check: CrossCheck,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        evidence: Option<Digest>,
    },
    Engagement {
        percept: String,
        case: EngagementCase,
    },
    Picture {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        head: Option<Digest>,
        tracks: Vec<TrackSummary>,
    },
    Routes {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        assessment: RiskAssessment,
    },
    Decision {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        track: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        opinion: Option<Opinion>,
        decision: Option<Decision>,
        detail: String,
    },
    Audit {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        target: Digest,
        trail: Vec<AuditEvent>,
    },
    Assertion {
        index: usize,
        description: String,
        passed: bool,
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub seq: usize,
    /// Timeline tick; absent for end-of-run records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick: Option<i64>,
    /// Index of the timeline event that caused the record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<usize>,
    #[serde(flatten)]
    pub record: Record,
}

#[derive(Serialize, Deserialize)]
struct Header {
    event: String,
    scenario: Scenario,
}

/// The ordered record of a run, headed by the scenario that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub scenario: Scenario,
    pub lines: Vec<LogLine>,
}

impl EventLog {
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.lines.iter().map(|l| &l.record)
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header { event: "scenario".into(), scenario: self.scenario.clone() };
        let mut out = serde_json::to_string(&header).expect("scenario serializes");
        out.push('\n');
        for line in &self.lines {
            out.push_str(&serde_json::to_string(line).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<EventLog, ScenarioError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| ScenarioError::Parse("empty event log".into()))?;
        let header: Header = serde_json::from_str(first).map_err(|e| ScenarioError::Parse(format!("line 1: {e}")))?;
        if header.event != "scenario" {
            return Err(ScenarioError::Parse("line 1: expected the scenario header".into()));
        }
        let lines = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| ScenarioError::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<Vec<LogLine>, _>>()?;
        Ok(EventLog { scenario: header.scenario, lines })
    }
}

#[derive(Debug)]
pub struct ReplayOutcome {
    pub identical: bool,
    /// First differing line, 1-based, when the logs differ.
    pub first_difference: Option<usize>,
    pub outcome: engine::RunOutcome,
}

/// Reruns the scenario embedded in a log and compares the regenerated log
/// with the original byte for byte.
pub fn replay(events_jsonl: &str) -> Result<ReplayOutcome, ScenarioError> {
    let original = EventLog::parse(events_jsonl)?;
    let outcome = engine::run(&original.scenario, None)?;
    let regenerated = outcome.log.to_jsonl();
    let identical = regenerated == events_jsonl;
    let first_difference = if identical {
        None
    } else {
        let mut a = events_jsonl.lines();
        let mut b = regenerated.lines();
        let mut n = 1;
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => n += 1,
                (None, None) => break Some(n),
                _ => break Some(n),
            }
        }
    };
    Ok(ReplayOutcome { identical, first_difference, outcome })
}
