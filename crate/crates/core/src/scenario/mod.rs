//! Deterministic scenario engine: scripted timelines of messages, link
//! outages, detections and operator choices run over in-process ledger nodes
//! in discrete virtual time.
//!
//! A scenario is JSON. Every tick is one second after `start`; all randomness
//! comes from `seed`. The run emits a JSON-lines event log whose first line
//! embeds the scenario itself, so a log can be replayed and compared byte for
//! byte.

mod bundled;
mod engine;
mod log;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::{MessageCategory, RefIndicator, WfMessage};
use crate::crypto::Digest;
use crate::gate::{parse_detection_stream, ConflictCode, Detection, GateConfig, ModelProvenance, Protection};
use crate::ledger::{LinkSpec, LinkState, DEFAULT_BLOCK_SIZE};
use crate::picture::{PictureConfig, RouteOption, TrackKind, DEFAULT_LAMBDA_KM, DEFAULT_U_MAX};
use crate::trust::{Outcome, SourceRegistry};

pub use bundled::{bundled, BUNDLED};
pub use engine::{
    default_model, group_key, node_keypair, run, source_keypair, AssertionResult, NodeState, PerceptOutcome, RunOutcome,
};
pub use log::{replay, EventLog, LogLine, Record, ReplayOutcome, TrackSummary};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("event {index}: {reason}")]
    InvalidEvent { index: usize, reason: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("event {index} failed: {reason}")]
    Runtime { index: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::InvalidEvent { .. } | ScenarioError::Invalid(_) => "ValidationError",
            ScenarioError::Runtime { .. } => "RuntimeError",
            ScenarioError::Parse(_) => "ParseError",
            ScenarioError::Io { .. } => "IoError",
        }
    }

    /// Timeline index of the offending event, when there is one.
    pub fn event_index(&self) -> Option<usize> {
        match self {
            ScenarioError::InvalidEvent { index, .. } | ScenarioError::Runtime { index, .. } => Some(*index),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Military,
    Humanitarian,
    CivilianRelay,
    #[serde(rename = "ICRC")]
    Icrc,
    Observer,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Military => "Military",
            Role::Humanitarian => "Humanitarian",
            Role::CivilianRelay => "CivilianRelay",
            Role::Icrc => "ICRC",
            Role::Observer => "Observer",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Role, String> {
        match s {
            "Military" => Ok(Role::Military),
            "Humanitarian" => Ok(Role::Humanitarian),
            "CivilianRelay" => Ok(Role::CivilianRelay),
            "ICRC" => Ok(Role::Icrc),
            "Observer" => Ok(Role::Observer),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub role: Role,
    /// Encryption groups this node holds keys for.
    #[serde(default)]
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Differential-privacy parameter for civilian-relay submissions, per km.
    pub epsilon: f64,
    pub lambda_km: f64,
    pub similarity_threshold: f64,
    pub u_max: f64,
    pub picture: PictureConfig,
    pub gate: GateConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            epsilon: 1.0,
            lambda_km: DEFAULT_LAMBDA_KM,
            similarity_threshold: 0.9,
            u_max: DEFAULT_U_MAX,
            picture: PictureConfig::default(),
            gate: GateConfig::default(),
        }
    }
}

/// A sign code such as `"P-01"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignCode {
    pub category: MessageCategory,
    pub subject: u8,
}

impl std::str::FromStr for SignCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (cat, num) = s.split_once('-').ok_or_else(|| format!("sign `{s}` is not of the form X-NN"))?;
        let mut chars = cat.chars();
        let category = match (chars.next(), chars.next()) {
            (Some(c), None) => MessageCategory::from_code(c),
            _ => None,
        }
        .ok_or_else(|| format!("unknown category in sign `{s}`"))?;
        let subject = num.parse().map_err(|_| format!("bad subject number in sign `{s}`"))?;
        Ok(SignCode { category, subject })
    }
}

impl std::fmt::Display for SignCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{:02}", self.category.code(), self.subject)
    }
}

impl Serialize for SignCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub indicator: RefIndicator,
    /// Label of an earlier `send_message` event.
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSpec {
    pub originator: String,
    pub sign: SignCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<[f64; 2]>,
    #[serde(default = "default_radius")]
    pub radius_m: u32,
    #[serde(default, rename = "ref", skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u32>,
    /// Encrypt for this group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

fn default_radius() -> u32 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    Picture,
    /// Route risk over the scenario's routes, or the named subset.
    Routes {
        #[serde(default)]
        routes: Vec<String>,
    },
    /// Decision support on the nearest track of `track_kind` within `radius_km`.
    Decision {
        location: [f64; 2],
        track_kind: TrackKind,
        #[serde(default = "default_query_radius")]
        radius_km: f64,
        risk_of_inaction: f64,
        risk_of_action: f64,
    },
    /// Audit trail of a labelled message.
    Audit {
        target: String,
    },
}

fn default_query_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SendMessage {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        message: MessageSpec,
    },
    SetLink {
        a: String,
        b: String,
        state: LinkState,
    },
    /// Runs the protective gate over a detection stream observed at `location`.
    InjectDetections {
        node: String,
        label: String,
        location: [f64; 2],
        truth: Protection,
        /// Path of a detection JSON-lines file, relative to the scenario file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stream: Option<String>,
        /// Detections inline; filled from `stream` on load.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detections: Option<Vec<Detection>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<ModelProvenance>,
    },
    OperatorInput {
        percept: String,
        assessment: Protection,
        #[serde(default)]
        note: String,
    },
    Feedback {
        source: String,
        outcome: Outcome,
    },
    Query {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        query: Query,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub at: i64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackStatusCheck {
    Live,
    UnderDuress,
    /// The message contributes to no track, e.g. after a cancel.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Assertion {
    TrackCount {
        node: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<TrackKind>,
        equals: usize,
    },
    TrackStatus {
        node: String,
        message: String,
        status: TrackStatusCheck,
    },
    ExpectedAtLeast {
        node: String,
        message: String,
        value: f64,
    },
    /// The listed nodes (all when empty) end with byte-identical chains.
    Converged {
        #[serde(default)]
        nodes: Vec<String>,
    },
    /// Every track's contributing digests resolve in the node's ledger and a
    /// rebuild from the serialized chain reproduces the picture.
    Traceable {
        node: String,
    },
    ChosenRoute {
        query: String,
        equals: String,
    },
    MachineAssessment {
        percept: String,
        equals: Protection,
    },
    Conflict {
        percept: String,
        code: ConflictCode,
    },
    /// The conflict evidence of a percept has a receipt in the node's audit trail.
    EvidenceInLedger {
        percept: String,
        node: String,
    },
    /// No engagement case resolved to an engagement.
    NoEngagement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    pub start: DateTime<Utc>,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    #[serde(default)]
    pub settings: Settings,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub sources: SourceRegistry,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub routes: Vec<RouteOption>,
    /// Node whose picture goes into the GeoJSON export; the first node by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_node: Option<String>,
    #[serde(default)]
    pub timeline: Vec<TimedEvent>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

fn default_block_size() -> usize {
    DEFAULT_BLOCK_SIZE
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    /// Reads a scenario file and inlines detection streams referenced relative to it.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = read(path)?;
        let mut scenario = Scenario::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        scenario.resolve_streams(|name| read(&base.join(name)))?;
        Ok(scenario)
    }

    /// Fills `detections` of every inject event from its `stream` via `fetch`.
    pub fn resolve_streams(
        &mut self,
        mut fetch: impl FnMut(&str) -> Result<String, ScenarioError>,
    ) -> Result<(), ScenarioError> {
        for (index, ev) in self.timeline.iter_mut().enumerate() {
            if let Event::InjectDetections { stream: Some(name), detections: detections @ None, .. } = &mut ev.event {
                let text = fetch(name)?;
                let parsed = parse_detection_stream(&text)
                    .map_err(|e| ScenarioError::InvalidEvent { index, reason: e.to_string() })?;
                *detections = Some(parsed);
            }
        }
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |r: String| Err(ScenarioError::Invalid(r));
        if self.block_size == 0 {
            return invalid("block_size must be positive".into());
        }
        if !(self.settings.epsilon > 0.0) {
            return invalid(format!("epsilon {} must be positive", self.settings.epsilon));
        }
        if !(self.settings.lambda_km > 0.0) {
            return invalid(format!("lambda_km {} must be positive", self.settings.lambda_km));
        }
        let mut node_ids = BTreeSet::new();
        for n in &self.nodes {
            if !node_ids.insert(n.id.as_str()) {
                return invalid(format!("duplicate node `{}`", n.id));
            }
        }
        let mut source_ids = BTreeSet::new();
        for s in &self.sources.sources {
            if !source_ids.insert(s.source_id.as_str()) {
                return invalid(format!("duplicate source `{}`", s.source_id));
            }
            if node_ids.contains(s.source_id.as_str()) {
                return invalid(format!("source `{}` shares an id with a node", s.source_id));
            }
        }
        for l in &self.links {
            for end in [&l.a, &l.b] {
                if !node_ids.contains(end.as_str()) {
                    return invalid(format!("link endpoint `{end}` is not a declared node"));
                }
            }
        }
        let route_ids: BTreeSet<&str> = self.routes.iter().map(|r| r.route_id.as_str()).collect();
        if route_ids.len() != self.routes.len() {
            return invalid("duplicate route id".into());
        }
        if let Some(r) = self.routes.iter().find(|r| r.polyline.len() < 2) {
            return invalid(format!("route `{}` needs at least two points", r.route_id));
        }
        if let Some(n) = &self.report_node {
            if !node_ids.contains(n.as_str()) {
                return invalid(format!("report node `{n}` is not declared"));
            }
        }

        let mut messages: BTreeMap<&str, usize> = BTreeMap::new();
        let mut percepts: BTreeSet<&str> = BTreeSet::new();
        let mut queries: BTreeMap<&str, &Query> = BTreeMap::new();
        let mut last_tick = i64::MIN;
        for (index, ev) in self.timeline.iter().enumerate() {
            let fail = |reason: String| Err(ScenarioError::InvalidEvent { index, reason });
            if ev.at < 0 {
                return fail(format!("tick {} is negative", ev.at));
            }
            if ev.at < last_tick {
                return fail(format!("tick {} precedes the previous event's tick {last_tick}", ev.at));
            }
            last_tick = ev.at;
            let node_known = |id: &str| node_ids.contains(id);
            match &ev.event {
                Event::SendMessage { node, label, message } => {
                    if !node_known(node) {
                        return fail(format!("unknown node `{node}`"));
                    }
                    if !source_ids.contains(message.originator.as_str()) {
                        return fail(format!("unknown originator `{}`", message.originator));
                    }
                    let target = message.reference.as_ref().map(|_| Digest::ZERO);
                    if let Err(e) = compose(message, self.start, target).validate() {
                        return fail(e.to_string());
                    }
                    if let Some(r) = &message.reference {
                        if !messages.contains_key(r.target.as_str()) {
                            return fail(format!("reference to undefined message `{}`", r.target));
                        }
                    }
                    if let Some(g) = &message.group {
                        let spec = self.node(node).expect("checked");
                        if !spec.groups.contains(g) {
                            return fail(format!("node `{node}` holds no key for group `{g}`"));
                        }
                    }
                    if let Some(l) = label {
                        if messages.insert(l, index).is_some() || percepts.contains(l.as_str()) {
                            return fail(format!("duplicate label `{l}`"));
                        }
                    }
                }
                Event::SetLink { a, b, .. } => {
                    for end in [a, b] {
                        if !node_known(end) {
                            return fail(format!("unknown node `{end}`"));
                        }
                    }
                }
                Event::InjectDetections { node, label, detections, location, .. } => {
                    if !node_known(node) {
                        return fail(format!("unknown node `{node}`"));
                    }
                    if detections.is_none() {
                        return fail("detection stream not resolved".into());
                    }
                    if !(-90.0..=90.0).contains(&location[0]) || !(-180.0..=180.0).contains(&location[1]) {
                        return fail(format!("location {location:?} out of range"));
                    }
                    if !percepts.insert(label) || messages.contains_key(label.as_str()) {
                        return fail(format!("duplicate label `{label}`"));
                    }
                }
                Event::OperatorInput { percept, .. } => {
                    if !percepts.contains(percept.as_str()) {
                        return fail(format!("unknown percept `{percept}`"));
                    }
                }
                Event::Feedback { source, .. } => {
                    if !source_ids.contains(source.as_str()) {
                        return fail(format!("unknown source `{source}`"));
                    }
                }
                Event::Query { node, label, query } => {
                    if !node_known(node) {
                        return fail(format!("unknown node `{node}`"));
                    }
                    match query {
                        Query::Routes { routes } => {
                            if self.routes.is_empty() {
                                return fail("route query without declared routes".into());
                            }
                            if let Some(r) = routes.iter().find(|r| !route_ids.contains(r.as_str())) {
                                return fail(format!("unknown route `{r}`"));
                            }
                        }
                        Query::Audit { target } if !messages.contains_key(target.as_str()) => {
                            return fail(format!("audit of undefined message `{target}`"));
                        }
                        _ => {}
                    }
                    if let Some(l) = label {
                        if queries.insert(l, query).is_some() {
                            return fail(format!("duplicate query label `{l}`"));
                        }
                    }
                }
            }
        }

        for (i, a) in self.assertions.iter().enumerate() {
            let bad = |r: String| Err(ScenarioError::Invalid(format!("assertion {i}: {r}")));
            let check_node = |n: &str| node_ids.contains(n);
            match a {
                Assertion::TrackCount { node, .. } | Assertion::Traceable { node } => {
                    if !check_node(node) {
                        return bad(format!("unknown node `{node}`"));
                    }
                }
                Assertion::TrackStatus { node, message, .. } | Assertion::ExpectedAtLeast { node, message, .. } => {
                    if !check_node(node) {
                        return bad(format!("unknown node `{node}`"));
                    }
                    if !messages.contains_key(message.as_str()) {
                        return bad(format!("unknown message `{message}`"));
                    }
                }
                Assertion::Converged { nodes } => {
                    if let Some(n) = nodes.iter().find(|n| !check_node(n)) {
                        return bad(format!("unknown node `{n}`"));
                    }
                }
                Assertion::ChosenRoute { query, .. } => {
                    if !matches!(queries.get(query.as_str()), Some(Query::Routes { .. })) {
                        return bad(format!("`{query}` is not a labelled route query"));
                    }
                }
                Assertion::MachineAssessment { percept, .. } | Assertion::Conflict { percept, .. } => {
                    if !percepts.contains(percept.as_str()) {
                        return bad(format!("unknown percept `{percept}`"));
                    }
                }
                Assertion::EvidenceInLedger { percept, node } => {
                    if !percepts.contains(percept.as_str()) {
                        return bad(format!("unknown percept `{percept}`"));
                    }
                    if !check_node(node) {
                        return bad(format!("unknown node `{node}`"));
                    }
                }
                Assertion::NoEngagement => {}
            }
        }
        Ok(())
    }
}

/// The protocol message a send event describes, referencing `target` when the
/// spec carries a reference.
pub(crate) fn compose(m: &MessageSpec, timestamp: DateTime<Utc>, target: Option<Digest>) -> WfMessage {
    let mut msg = WfMessage::new(&m.originator, m.sign.category, m.sign.subject, timestamp);
    if let Some(loc) = m.location {
        msg = msg.at(loc[0], loc[1], m.radius_m);
    }
    if let (Some(r), Some(t)) = (&m.reference, target) {
        msg = msg.referencing(r.indicator, t);
    }
    msg.payload_text = m.text.clone();
    msg.duration = m.duration;
    msg
}

pub(crate) fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), reason: e.to_string() })
}
