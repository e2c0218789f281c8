use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::log::{EventLog, LogLine, Record, TrackSummary};
use super::{compose, Assertion, Event, NodeSpec, Query, Role, Scenario, ScenarioError, TrackStatusCheck};
use crate::codec::{seal, CodecError, EffectiveState};
use crate::crypto::{Digest, GroupKey, KeyRegistry, Keypair, Keyring};
use crate::gate::{
    cross_check, evidence_message, perceive_stream, resolve_engagement, ConflictCode, CrossCheck, EngagementCase,
    ModelProvenance, PerceptionState, Protection, WeightsOrigin,
};
use crate::ledger::{audit_trail, sync, AuditEventKind, Block, LedgerNode, LinkSchedule, LinkState};
use crate::picture::{
    anonymize, assess_routes, build_picture, decision_support, to_geojson, Picture, Pseudonymizer, RiskAssessment,
    RouteOption,
};
use crate::trust::{cluster_sources, DiversityModel, Profiles};

/// One simulated participant: its ledger replica and the group keys it holds.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub spec: NodeSpec,
    pub ledger: LedgerNode,
    pub keyring: Keyring,
}

/// What the gate made of one detection stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptOutcome {
    pub node: String,
    pub location: [f64; 2],
    pub truth: Protection,
    pub machine: PerceptionState,
    pub check: CrossCheck,
    pub evidence: Option<Digest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub index: usize,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub log: EventLog,
    pub nodes: Vec<NodeState>,
    pub profiles: Profiles,
    pub pictures: BTreeMap<String, Picture>,
    pub percepts: BTreeMap<String, PerceptOutcome>,
    pub route_queries: BTreeMap<String, RiskAssessment>,
    pub engagements: Vec<(String, EngagementCase)>,
    pub assertions: Vec<AssertionResult>,
    /// Public keys of every node, source and pseudonym seen during the run.
    pub registry: KeyRegistry,
}

impl RunOutcome {
    pub fn scenario(&self) -> &Scenario {
        &self.log.scenario
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn node(&self, id: &str) -> Option<&NodeState> {
        self.nodes.iter().find(|n| n.spec.id == id)
    }

    /// Node whose picture is exported.
    pub fn report_node(&self) -> Option<&str> {
        self.scenario().report_node.as_deref().or_else(|| self.nodes.first().map(|n| n.spec.id.as_str()))
    }

    pub fn geojson(&self) -> serde_json::Value {
        let empty = Picture::default();
        let picture = self.report_node().and_then(|n| self.pictures.get(n)).unwrap_or(&empty);
        to_geojson(picture, &self.scenario().routes, self.route_queries.values().last())
    }

    pub fn report_markdown(&self) -> String {
        super::report::render(self)
    }

    /// Writes `events.jsonl`, `picture.geojson` and `report.md` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), ScenarioError> {
        let io = |e: std::io::Error| ScenarioError::Io { path: dir.display().to_string(), reason: e.to_string() };
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("events.jsonl"), self.log.to_jsonl()).map_err(io)?;
        let geo = serde_json::to_string_pretty(&self.geojson()).expect("geojson serializes");
        std::fs::write(dir.join("picture.geojson"), geo + "\n").map_err(io)?;
        std::fs::write(dir.join("report.md"), self.report_markdown()).map_err(io)?;
        Ok(())
    }
}

/// Key derivation labels; public so tools can reconstruct the registry.
pub fn node_keypair(node_id: &str) -> Keypair {
    Keypair::derive(&format!("node:{node_id}"))
}

pub fn source_keypair(source_id: &str) -> Keypair {
    Keypair::derive(&format!("source:{source_id}"))
}

pub fn group_key(scenario: &str, group_id: &str) -> GroupKey {
    GroupKey::derive(group_id, &format!("scenario:{scenario}"))
}

/// Model used when an inject event names none.
pub fn default_model() -> ModelProvenance {
    ModelProvenance {
        model_id: "scripted-frcnn".into(),
        algorithm_digest: Digest::of(b"faster-rcnn"),
        training_data_digest: Digest::of(b"scripted detections"),
        weights_origin: WeightsOrigin::Verified,
    }
}

struct Sim {
    scenario: Scenario,
    rng: ChaCha8Rng,
    nodes: Vec<NodeState>,
    registry: KeyRegistry,
    groups: BTreeMap<String, GroupKey>,
    profiles: Profiles,
    schedule: LinkSchedule,
    pseudonyms: Pseudonymizer,
    labels: BTreeMap<String, Digest>,
    percepts: BTreeMap<String, PerceptOutcome>,
    route_queries: BTreeMap<String, RiskAssessment>,
    engagements: Vec<(String, EngagementCase)>,
    last_tracks: Vec<BTreeMap<String, TrackSummary>>,
    /// Ledger head each node's tracks were last computed at; `None` forces a rebuild.
    fused_at: Vec<Option<Option<Digest>>>,
    lines: Vec<LogLine>,
    tick: Option<i64>,
    cause: Option<usize>,
}

/// Runs a scenario. `seed` overrides the scenario's own seed; the effective
/// seed is recorded in the log header.
pub fn run(scenario: &Scenario, seed: Option<u64>) -> Result<RunOutcome, ScenarioError> {
    scenario.validate()?;
    let mut scenario = scenario.clone();
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let mut sim = Sim::new(scenario)?;
    let timeline = sim.scenario.timeline.clone();
    for (index, ev) in timeline.iter().enumerate() {
        sim.tick = Some(ev.at);
        sim.cause = Some(index);
        sim.settle(ev.at)?;
        sim.apply(index, ev.at, &ev.event)?;
        sim.refresh_tracks(index)?;
    }
    if let Some(last) = timeline.last() {
        sim.tick = Some(last.at);
        sim.cause = None;
        sim.settle(last.at)?;
        sim.refresh_tracks(timeline.len())?;
    }
    sim.finish()
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

fn runtime(index: usize) -> impl Fn(String) -> ScenarioError {
    move |reason| ScenarioError::Runtime { index, reason }
}

impl Sim {
    fn new(scenario: Scenario) -> Result<Sim, ScenarioError> {
        let mut registry = KeyRegistry::new();
        let mut groups = BTreeMap::new();
        let mut nodes = Vec::new();
        for spec in &scenario.nodes {
            let key = node_keypair(&spec.id);
            registry.register(&spec.id, key.public());
            let mut keyring = Keyring::new();
            for g in &spec.groups {
                let k = groups.entry(g.clone()).or_insert_with(|| group_key(&scenario.name, g)).clone();
                keyring.add(k);
            }
            let ledger = LedgerNode::with_block_size(&spec.id, key, scenario.block_size);
            nodes.push(NodeState { spec: spec.clone(), ledger, keyring });
        }
        for s in &scenario.sources.sources {
            registry.register(&s.source_id, source_keypair(&s.source_id).public());
        }
        let profiles = scenario.sources.profiles().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let pseudonyms = Pseudonymizer::new(format!("{}:{}", scenario.name, scenario.seed));
        let schedule = LinkSchedule::new(scenario.links.clone());
        let last_tracks = vec![BTreeMap::new(); nodes.len()];
        Ok(Sim {
            scenario,
            rng,
            nodes,
            registry,
            groups,
            profiles,
            schedule,
            pseudonyms,
            labels: BTreeMap::new(),
            percepts: BTreeMap::new(),
            route_queries: BTreeMap::new(),
            engagements: Vec::new(),
            fused_at: vec![None; last_tracks.len()],
            last_tracks,
            lines: Vec::new(),
            tick: None,
            cause: None,
        })
    }

    fn emit(&mut self, record: Record) {
        let seq = self.lines.len();
        self.lines.push(LogLine { seq, tick: self.tick, cause: self.cause, record });
    }

    fn time(&self, tick: i64) -> DateTime<Utc> {
        self.scenario.start + Duration::seconds(tick)
    }

    fn index_of(&self, node: &str) -> usize {
        self.nodes.iter().position(|n| n.spec.id == node).expect("validated node id")
    }

    fn model(&self) -> Result<DiversityModel, String> {
        cluster_sources(self.profiles.iter(), self.scenario.settings.similarity_threshold).map_err(|e| e.to_string())
    }

    fn picture_of(&self, i: usize) -> Result<Picture, String> {
        let n = &self.nodes[i];
        build_picture(n.ledger.chain(), &n.keyring, &self.profiles, &self.model()?, &self.scenario.settings.picture)
            .map_err(|e| e.to_string())
    }

    /// Applies link states at `tick`, then syncs every up link until no node changes.
    fn settle(&mut self, tick: i64) -> Result<(), ScenarioError> {
        let now = self.time(tick);
        let pairs = self.schedule.pairs();
        for (a, b) in &pairs {
            let state = self.schedule.state_at(a, b, tick);
            let (ia, ib) = (self.index_of(a), self.index_of(b));
            self.nodes[ia].ledger.set_link(b, state);
            self.nodes[ib].ledger.set_link(a, state);
        }
        loop {
            let mut changed = false;
            for (a, b) in &pairs {
                if self.schedule.state_at(a, b, tick) != LinkState::Up {
                    continue;
                }
                let (ia, ib) = (self.index_of(a), self.index_of(b));
                let (na, nb) = pair_mut(&mut self.nodes, ia, ib);
                if na.ledger.is_quarantined(b) || nb.ledger.is_quarantined(a) {
                    continue;
                }
                let before = (na.ledger.entry_count(), nb.ledger.entry_count());
                match sync(&mut na.ledger, &mut nb.ledger, now) {
                    Ok(out) => {
                        if before != (out.entries_after, nb.ledger.entry_count()) {
                            changed = true;
                            self.emit(Record::Sync {
                                a: a.clone(),
                                b: b.clone(),
                                entries: out.entries_after,
                                head: out.head,
                            });
                        }
                    }
                    Err(e) => self.emit(Record::SyncRefused { a: a.clone(), b: b.clone(), detail: e.to_string() }),
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Logs every track whose fused state changed on any node since the last call.
    fn refresh_tracks(&mut self, index: usize) -> Result<(), ScenarioError> {
        for i in 0..self.nodes.len() {
            let head = Some(self.nodes[i].ledger.head());
            if self.fused_at[i] == head {
                continue;
            }
            self.fused_at[i] = head;
            let picture = self.picture_of(i).map_err(runtime(index))?;
            let current: BTreeMap<String, TrackSummary> =
                picture.tracks.iter().map(|t| (t.track_id.clone(), TrackSummary::from(t))).collect();
            let node = self.nodes[i].spec.id.clone();
            let previous = std::mem::take(&mut self.last_tracks[i]);
            for (id, t) in &current {
                if previous.get(id) != Some(t) {
                    self.emit(Record::TrackUpdate { node: node.clone(), track: t.clone() });
                }
            }
            for id in previous.keys().filter(|id| !current.contains_key(*id)) {
                self.emit(Record::TrackRemoved { node: node.clone(), track_id: id.clone() });
            }
            self.last_tracks[i] = current;
        }
        Ok(())
    }

    fn apply(&mut self, index: usize, tick: i64, event: &Event) -> Result<(), ScenarioError> {
        let err = runtime(index);
        let now = self.time(tick);
        match event {
            Event::SendMessage { node, label, message } => {
                let i = self.index_of(node);
                let target = message.reference.as_ref().map(|r| self.labels[&r.target]);
                let mut msg = compose(message, now, target);
                let civilian = self.nodes[i].spec.role == Role::CivilianRelay;
                let signer = if civilian {
                    msg = anonymize(&msg, self.scenario.settings.epsilon, &self.pseudonyms, &mut self.rng)
                        .map_err(|e| err(e.to_string()))?;
                    self.registry.register(&msg.originator_id, self.nodes[i].ledger.keypair().public());
                    self.nodes[i].ledger.keypair().clone()
                } else {
                    super::engine::source_keypair(&message.originator)
                };
                let group = message.group.as_ref().map(|g| self.groups[g].clone());
                let envelope = match seal(&msg, &signer, group.as_ref()) {
                    Ok(e) => e,
                    Err(e) => {
                        self.emit(rejected(node, label, e.code(), e.to_string()));
                        return Ok(());
                    }
                };
                let digest = envelope.digest;
                match self.nodes[i].ledger.append(envelope, &self.registry, now) {
                    Ok(entry) => {
                        if let Some(l) = label {
                            self.labels.insert(l.clone(), digest);
                        }
                        self.emit(Record::Append {
                            node: node.clone(),
                            label: label.clone(),
                            digest,
                            entry_id: entry.entry_id,
                            originator: msg.originator_id.clone(),
                            sign: message.sign.to_string(),
                            references: msg.referenced_hash,
                            anonymized: civilian,
                            group: message.group.clone(),
                        });
                    }
                    Err(e) => self.emit(rejected(node, label, e.code(), e.to_string())),
                }
            }
            Event::SetLink { a, b, state } => {
                self.schedule.set(tick, a, b, *state);
                self.emit(Record::Link { a: a.clone(), b: b.clone(), state: *state });
            }
            Event::InjectDetections { node, label, location, truth, detections, model, .. } => {
                let i = self.index_of(node);
                let provenance = model.clone().unwrap_or_else(default_model);
                let detections = detections.clone().expect("validated streams are resolved");
                let config = self.scenario.settings.gate.clone();
                let (machine, seen) = perceive_stream(provenance.clone(), detections, &config);
                self.emit(Record::Percept {
                    node: node.clone(),
                    label: label.clone(),
                    model: provenance.model_id.clone(),
                    machine: machine.clone(),
                });
                let picture = self.picture_of(i).map_err(&err)?;
                let check = cross_check(&machine, &seen, &picture, *location, &config);
                let evidence = match evidence_message(node, &check, *location, now) {
                    Some(msg) => {
                        let key = self.nodes[i].ledger.keypair().clone();
                        let envelope = seal(&msg, &key, None).map_err(|e: CodecError| err(e.to_string()))?;
                        let entry = self.nodes[i]
                            .ledger
                            .append(envelope, &self.registry, now)
                            .map_err(|e| err(e.to_string()))?;
                        Some(entry.envelope.digest)
                    }
                    None => None,
                };
                self.emit(Record::CrossCheck {
                    node: node.clone(),
                    label: label.clone(),
                    check: check.clone(),
                    evidence,
                });
                self.percepts.insert(
                    label.clone(),
                    PerceptOutcome { node: node.clone(), location: *location, truth: *truth, machine, check, evidence },
                );
            }
            Event::OperatorInput { percept, assessment, note } => {
                let p = &self.percepts[percept];
                let operator = PerceptionState::operator(*assessment, note.clone());
                let case = resolve_engagement(p.truth, &operator, &p.machine);
                self.engagements.push((percept.clone(), case.clone()));
                self.emit(Record::Engagement { percept: percept.clone(), case });
            }
            Event::Feedback { source, outcome } => {
                let trust = self.profiles.apply_feedback(source, *outcome).trust();
                self.fused_at.iter_mut().for_each(|f| *f = None);
                self.emit(Record::Feedback { source: source.clone(), outcome: *outcome, trust });
            }
            Event::Query { node, label, query } => {
                let i = self.index_of(node);
                let picture = self.picture_of(i).map_err(&err)?;
                let node = node.clone();
                let label = label.clone();
                match query {
                    Query::Picture => {
                        let tracks = picture.tracks.iter().map(TrackSummary::from).collect();
                        self.emit(Record::Picture { node, label, head: picture.ledger_head, tracks });
                    }
                    Query::Routes { routes } => {
                        let chosen: Vec<RouteOption> = self
                            .scenario
                            .routes
                            .iter()
                            .filter(|r| routes.is_empty() || routes.contains(&r.route_id))
                            .cloned()
                            .collect();
                        let assessment = assess_routes(&chosen, &picture.tracks, self.scenario.settings.lambda_km)
                            .map_err(|e| err(e.to_string()))?;
                        let key = label.clone().unwrap_or_else(|| format!("query-{index}"));
                        self.route_queries.insert(key, assessment.clone());
                        self.emit(Record::Routes { node, label, assessment });
                    }
                    Query::Decision { location, track_kind, radius_km, risk_of_inaction, risk_of_action } => {
                        let near = picture.near(*location, *radius_km, Some(*track_kind));
                        let record = match near.first() {
                            Some((t, _)) => {
                                let outcome = decision_support(
                                    &t.opinion,
                                    *risk_of_inaction,
                                    *risk_of_action,
                                    self.scenario.settings.u_max,
                                );
                                let (decision, detail) = match outcome {
                                    Ok(d) => {
                                        (Some(d), format!("E = {:.4}, u = {:.4}", t.expected, t.opinion.uncertainty))
                                    }
                                    Err(e) => (None, e.to_string()),
                                };
                                Record::Decision {
                                    node,
                                    label,
                                    track: Some(t.track_id.clone()),
                                    opinion: Some(t.opinion),
                                    decision,
                                    detail,
                                }
                            }
                            None => Record::Decision {
                                node,
                                label,
                                track: None,
                                opinion: None,
                                decision: None,
                                detail: format!("no {track_kind:?} track within {radius_km} km"),
                            },
                        };
                        self.emit(record);
                    }
                    Query::Audit { target } => {
                        let digest = self
                            .labels
                            .get(target)
                            .copied()
                            .ok_or_else(|| err(format!("`{target}` was never appended")))?;
                        let n = &self.nodes[i];
                        let trail = audit_trail(n.ledger.chain(), &digest, &n.keyring).unwrap_or_default();
                        self.emit(Record::Audit { node, label, target: digest, trail });
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<RunOutcome, ScenarioError> {
        let mut pictures = BTreeMap::new();
        let end = self.scenario.timeline.len();
        for i in 0..self.nodes.len() {
            pictures.insert(self.nodes[i].spec.id.clone(), self.picture_of(i).map_err(runtime(end))?);
        }
        self.tick = None;
        self.cause = None;
        let mut results = Vec::new();
        for (index, a) in self.scenario.assertions.clone().iter().enumerate() {
            let (passed, detail) = self.evaluate(a, &pictures);
            let description = describe(a);
            self.emit(Record::Assertion { index, description: description.clone(), passed, detail: detail.clone() });
            results.push(AssertionResult { index, description, passed, detail });
        }
        Ok(RunOutcome {
            log: EventLog { scenario: self.scenario, lines: self.lines },
            nodes: self.nodes,
            profiles: self.profiles,
            pictures,
            percepts: self.percepts,
            route_queries: self.route_queries,
            engagements: self.engagements,
            assertions: results,
            registry: self.registry,
        })
    }

    fn evaluate(&self, a: &Assertion, pictures: &BTreeMap<String, Picture>) -> (bool, String) {
        let track_of = |node: &str, message: &str| {
            let digest = self.labels.get(message)?;
            pictures[node].tracks.iter().find(|t| t.contributing.contains(digest))
        };
        match a {
            Assertion::TrackCount { node, kind, equals } => {
                let n = pictures[node].tracks.iter().filter(|t| kind.is_none_or(|k| t.kind == k)).count();
                (n == *equals, format!("{n} tracks"))
            }
            Assertion::TrackStatus { node, message, status } => {
                let found = track_of(node, message);
                let passed = match (status, found) {
                    (TrackStatusCheck::Absent, t) => t.is_none(),
                    (TrackStatusCheck::Live, Some(t)) => t.status.is_live(),
                    (TrackStatusCheck::UnderDuress, Some(t)) => t.status == EffectiveState::UnderDuress,
                    (_, None) => false,
                };
                let detail = found.map_or("no track".into(), |t| format!("{} is {:?}", t.track_id, t.status));
                (passed, detail)
            }
            Assertion::ExpectedAtLeast { node, message, value } => match track_of(node, message) {
                Some(t) => (t.expected >= *value, format!("{} has E = {:.4}", t.track_id, t.expected)),
                None => (false, "no track".into()),
            },
            Assertion::Converged { nodes } => {
                let ids: Vec<&str> = if nodes.is_empty() {
                    self.nodes.iter().map(|n| n.spec.id.as_str()).collect()
                } else {
                    nodes.iter().map(String::as_str).collect()
                };
                let digests: Vec<Digest> =
                    ids.iter().map(|id| self.nodes[self.index_of(id)].ledger.chain_digest()).collect();
                let passed = digests.windows(2).all(|w| w[0] == w[1]);
                let heads: Vec<String> = ids
                    .iter()
                    .map(|id| self.nodes[self.index_of(id)].ledger.head().map_or("-".into(), |h| h.short()))
                    .collect();
                (passed, format!("heads {}", heads.join(", ")))
            }
            Assertion::Traceable { node } => self.traceable(node, &pictures[node]),
            Assertion::ChosenRoute { query, equals } => match self.route_queries.get(query) {
                Some(r) => (r.chosen == *equals, format!("chose {}", r.chosen)),
                None => (false, "query never ran".into()),
            },
            Assertion::MachineAssessment { percept, equals } => {
                let got = self.percepts[percept].machine.assessment;
                (got == *equals, format!("machine assessed {got:?}"))
            }
            Assertion::Conflict { percept, code } => {
                let codes: Vec<ConflictCode> = self.percepts[percept].check.codes();
                (codes.contains(code), format!("codes {codes:?}"))
            }
            Assertion::EvidenceInLedger { percept, node } => {
                let Some(digest) = self.percepts[percept].evidence else {
                    return (false, "no evidence recorded".into());
                };
                let n = &self.nodes[self.index_of(node)];
                match audit_trail(n.ledger.chain(), &digest, &n.keyring) {
                    Ok(trail) => {
                        let receipts = trail.iter().filter(|e| e.event == AuditEventKind::Receipt).count();
                        (receipts > 0, format!("{receipts} receipt(s) of {}", digest.short()))
                    }
                    Err(e) => (false, e.to_string()),
                }
            }
            Assertion::NoEngagement => {
                let engaged: Vec<&str> =
                    self.engagements.iter().filter(|(_, c)| c.engaged).map(|(p, _)| p.as_str()).collect();
                (engaged.is_empty(), format!("{} engagement case(s), engaged: {engaged:?}", self.engagements.len()))
            }
        }
    }

    fn traceable(&self, node: &str, picture: &Picture) -> (bool, String) {
        let n = &self.nodes[self.index_of(node)];
        let known: std::collections::BTreeSet<Digest> = n.ledger.entries().map(|e| e.envelope.digest).collect();
        let dangling: Vec<String> = picture
            .tracks
            .iter()
            .flat_map(|t| t.contributing.iter())
            .filter(|d| !known.contains(d))
            .map(|d| d.short())
            .collect();
        if !dangling.is_empty() {
            return (false, format!("unresolved digests {dangling:?}"));
        }
        let bytes = serde_json::to_vec(n.ledger.chain()).expect("chain serializes");
        let restored: Vec<Block> = match serde_json::from_slice(&bytes) {
            Ok(c) => c,
            Err(e) => return (false, e.to_string()),
        };
        let rebuilt = self.model().and_then(|m| {
            build_picture(&restored, &n.keyring, &self.profiles, &m, &self.scenario.settings.picture)
                .map_err(|e| e.to_string())
        });
        match rebuilt {
            Ok(p) if serde_json::to_vec(&p).ok() == serde_json::to_vec(picture).ok() => {
                (true, format!("{} tracks rebuilt identically", p.tracks.len()))
            }
            Ok(_) => (false, "rebuilt picture differs".into()),
            Err(e) => (false, e),
        }
    }
}

fn rejected(node: &str, label: &Option<String>, code: &str, detail: String) -> Record {
    Record::Rejected { node: node.to_owned(), label: label.clone(), code: code.to_owned(), detail }
}

pub(crate) fn describe(a: &Assertion) -> String {
    match a {
        Assertion::TrackCount { node, kind: Some(k), equals } => format!("{node} holds {equals} {k:?} track(s)"),
        Assertion::TrackCount { node, kind: None, equals } => format!("{node} holds {equals} track(s)"),
        Assertion::TrackStatus { node, message, status } => format!("{node}: track of `{message}` is {status:?}"),
        Assertion::ExpectedAtLeast { node, message, value } => format!("{node}: track of `{message}` has E >= {value}"),
        Assertion::Converged { nodes } if nodes.is_empty() => "all ledgers converged".into(),
        Assertion::Converged { nodes } => format!("ledgers of {} converged", nodes.join(", ")),
        Assertion::Traceable { node } => format!("{node}: every track traces to ledger digests"),
        Assertion::ChosenRoute { query, equals } => format!("`{query}` chooses route {equals}"),
        Assertion::MachineAssessment { percept, equals } => format!("machine assesses `{percept}` as {equals:?}"),
        Assertion::Conflict { percept, code } => format!("`{percept}` raises {code:?}"),
        Assertion::EvidenceInLedger { percept, node } => format!("evidence for `{percept}` is in {node}'s audit trail"),
        Assertion::NoEngagement => "no engagement case engages".into(),
    }
}
