//! The node: one ledger replica behind a single writer lock, an atomically
//! swapped picture snapshot, and a bounded event fan-out.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use pause_core::codec::{seal, seal_signed, WfMessage};
use pause_core::crypto::{Digest, KeyRegistry, Keypair, Keyring, SignatureBytes};
use pause_core::gate::{
    cross_check, evidence_message, perceive_stream, resolve_engagement, CrossCheck, Detection, EngagementCase,
    ModelProvenance, PerceptionState, Protection,
};
use pause_core::ledger::{
    audit_trail, load_chain_dir, save_chain_dir, AuditEvent, Block, LedgerNode, LinkState, SyncOutcome,
};
use pause_core::picture::{
    anonymize, assess_routes, build_picture, Picture, Pseudonymizer, RiskAssessment, RouteOption,
};
use pause_core::scenario::{default_model, Role, TrackSummary};
use pause_core::trust::{cluster_sources, Evidence, Outcome, Profiles, SourceRegistry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::config::{ConfigError, NodeConfig};
use crate::error::ApiError;
use crate::session::{ApiSession, Operation};

pub type AppState = Arc<Node>;

/// Pushed to every `/events` subscriber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum NodeEvent {
    Block {
        height: u64,
        hash: Digest,
        prev_hash: Digest,
        entries: usize,
    },
    Track {
        track: TrackSummary,
    },
    TrackRemoved {
        track_id: String,
    },
    Conflict {
        label: String,
        location: [f64; 2],
        check: CrossCheck,
        evidence: Option<Digest>,
    },
    Engagement {
        label: String,
        case: EngagementCase,
    },
    Trust {
        source_id: String,
        trust: f64,
    },
    /// The subscriber fell behind and `missed` events were dropped; the stream ends.
    Gap {
        missed: u64,
    },
}

impl NodeEvent {
    pub fn name(&self) -> &'static str {
        match self {
            NodeEvent::Block { .. } => "block",
            NodeEvent::Track { .. } => "track",
            NodeEvent::TrackRemoved { .. } => "track_removed",
            NodeEvent::Conflict { .. } => "conflict",
            NodeEvent::Engagement { .. } => "engagement",
            NodeEvent::Trust { .. } => "trust",
            NodeEvent::Gap { .. } => "gap",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub message: WfMessage,
    /// Originator's Ed25519 signature over the message digest. Required except
    /// for civilian relay sessions, whose submissions the node re-signs.
    #[serde(default)]
    pub signature: Option<SignatureBytes>,
    /// Encrypt for this group; the node must hold its key.
    #[serde(default)]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub digest: Digest,
    pub entry_id: Digest,
    pub received_at: DateTime<Utc>,
    pub originator_id: String,
    pub anonymized: bool,
    pub block_height: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub routes: Vec<RouteOption>,
    #[serde(default)]
    pub lambda_km: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustResponse {
    pub source_id: String,
    pub trust: f64,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorInput {
    pub assessment: Protection,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerceptRequest {
    pub label: String,
    /// `[latitude, longitude]` of the observed object.
    pub location: [f64; 2],
    pub detections: Vec<Detection>,
    #[serde(default)]
    pub model: Option<ModelProvenance>,
    /// Ground truth, when known (exercises and after-action review).
    #[serde(default)]
    pub truth: Option<Protection>,
    #[serde(default)]
    pub operator: Option<OperatorInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptResponse {
    pub label: String,
    pub machine: PerceptionState,
    pub check: CrossCheck,
    pub evidence: Option<Digest>,
    pub engagement: Option<EngagementCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyncRequest {
    pub node_id: String,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyncResponse {
    pub node_id: String,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerStatus {
    pub id: String,
    pub url: String,
    pub link: LinkState,
    pub quarantined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStatus {
    pub node_id: String,
    pub role: Role,
    pub head: Option<Digest>,
    pub blocks: usize,
    pub entries: usize,
    pub peers: Vec<PeerStatus>,
}

/// The current picture with the chain head it was built from.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub picture: Picture,
}

#[derive(Debug, thiserror::Error)]
pub enum NodeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot restore state from {path}: {reason}")]
    Restore { path: PathBuf, reason: String },
}

struct Inner {
    ledger: LedgerNode,
    registry: KeyRegistry,
    keyring: Keyring,
    profiles: Profiles,
    rng: ChaCha8Rng,
    pseudonyms: Pseudonymizer,
    tracks: BTreeMap<String, TrackSummary>,
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Node {
    config: NodeConfig,
    inner: Mutex<Inner>,
    snapshot: RwLock<Arc<Snapshot>>,
    events: broadcast::Sender<NodeEvent>,
    clock: Clock,
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Node").field("node_id", &self.config.node_id).finish()
    }
}

impl Node {
    /// Builds a node from its parts and restores any state persisted under
    /// `config.data_dir`.
    pub fn new(
        config: NodeConfig,
        keypair: Keypair,
        mut registry: KeyRegistry,
        keyring: Keyring,
        sources: &SourceRegistry,
    ) -> Result<Node, NodeError> {
        registry.register(&config.node_id, keypair.public());
        let mut profiles = sources.profiles().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let salt = Digest::of_parts(&[b"pause-pseudonym", &keypair.seed()]).to_hex();
        let pseudonyms = Pseudonymizer::new(format!("{}:{salt}", config.node_id));
        let rng = match config.anonymize_seed {
            Some(seed) => ChaCha8Rng::seed_from_u64(seed),
            None => ChaCha8Rng::from_entropy(),
        };
        let mut ledger = LedgerNode::with_block_size(&config.node_id, keypair, config.block_size);
        for p in &config.peers {
            ledger.add_peer(&p.id, LinkState::Down);
        }

        let restore = |path: PathBuf, reason: String| NodeError::Restore { path, reason };
        let chain_dir = config.data_dir.join("ledger");
        if chain_dir.is_dir() {
            let chain = load_chain_dir(&chain_dir).map_err(|e| restore(chain_dir.clone(), e.to_string()))?;
            ledger.install_chain(chain).map_err(|e| restore(chain_dir.clone(), e.to_string()))?;
        }
        let registry_file = config.data_dir.join("registry.json");
        if registry_file.is_file() {
            let saved: KeyRegistry = read_json(&registry_file).map_err(|e| restore(registry_file.clone(), e))?;
            for id in saved.ids() {
                if !registry.contains(id) {
                    registry.register(id, *saved.get(id).expect("listed id"));
                }
            }
        }
        let profiles_file = config.data_dir.join("profiles.json");
        if profiles_file.is_file() {
            profiles = read_json(&profiles_file).map_err(|e| restore(profiles_file.clone(), e))?;
        }

        let (events, _) = broadcast::channel(config.event_buffer);
        let node = Node {
            config,
            inner: Mutex::new(Inner { ledger, registry, keyring, profiles, rng, pseudonyms, tracks: BTreeMap::new() }),
            snapshot: RwLock::new(Arc::new(Snapshot::default())),
            events,
            clock: Box::new(Utc::now),
        };
        {
            let mut inner = node.lock();
            let picture = node.rebuild(&inner).map_err(|e| restore(node.config.data_dir.clone(), e.detail))?;
            inner.tracks = picture.tracks.iter().map(|t| (t.track_id.clone(), TrackSummary::from(t))).collect();
            *node.snapshot.write().expect("snapshot lock") = Arc::new(Snapshot { picture });
        }
        Ok(node)
    }

    /// Reads keys, registry and sources named by the config.
    pub fn open(config: NodeConfig) -> Result<Node, NodeError> {
        let keypair = config.keypair()?;
        let registry = config.key_registry()?;
        let mut keyring = Keyring::new();
        for k in config.group_keys()? {
            keyring.add(k);
        }
        let sources = config.source_registry()?;
        Node::new(config, keypair, registry, keyring, &sources)
    }

    /// Replaces the wall clock used for receipts.
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Node {
        self.clock = Box::new(clock);
        self
    }

    pub fn config(&self) -> &NodeConfig {
        &self.config
    }

    pub fn node_id(&self) -> &str {
        &self.config.node_id
    }

    pub fn role(&self) -> Role {
        self.config.role
    }

    pub fn subscribe(&self) -> broadcast::Receiver<NodeEvent> {
        self.events.subscribe()
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Current time at whole-second resolution, as messages require.
    fn now(&self) -> DateTime<Utc> {
        let now = (self.clock)();
        now.duration_trunc(TimeDelta::seconds(1)).unwrap_or(now)
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn chain(&self) -> Vec<Block> {
        self.lock().ledger.chain().to_vec()
    }

    pub fn chain_digest(&self) -> Digest {
        self.lock().ledger.chain_digest()
    }

    pub fn status(&self) -> NodeStatus {
        let inner = self.lock();
        NodeStatus {
            node_id: self.config.node_id.clone(),
            role: self.config.role,
            head: inner.ledger.head(),
            blocks: inner.ledger.chain().len(),
            entries: inner.ledger.entry_count(),
            peers: self
                .config
                .peers
                .iter()
                .map(|p| PeerStatus {
                    id: p.id.clone(),
                    url: p.url.clone(),
                    link: inner.ledger.link(&p.id),
                    quarantined: inner.ledger.is_quarantined(&p.id),
                })
                .collect(),
        }
    }

    fn rebuild(&self, inner: &Inner) -> Result<Picture, ApiError> {
        let model = cluster_sources(inner.profiles.iter(), self.config.similarity_threshold)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        build_picture(inner.ledger.chain(), &inner.keyring, &inner.profiles, &model, &self.config.picture_config())
            .map_err(ApiError::from)
    }

    fn emit(&self, event: NodeEvent) {
        // No subscribers is not an error.
        let _ = self.events.send(event);
    }

    /// Publishes blocks absent from `before`, rebuilds the picture when the
    /// chain moved or `force` is set, publishes track changes and persists.
    fn commit(&self, inner: &mut Inner, before: &BTreeSet<(u64, Digest)>, force: bool) -> Result<(), ApiError> {
        let mut moved = false;
        for b in inner.ledger.chain() {
            if !before.contains(&(b.height, b.block_hash)) {
                moved = true;
                self.emit(NodeEvent::Block {
                    height: b.height,
                    hash: b.block_hash,
                    prev_hash: b.prev_hash,
                    entries: b.entries.len(),
                });
            }
        }
        let shrunk = inner.ledger.chain().len() < before.len();
        if !(moved || shrunk || force) {
            return Ok(());
        }
        let picture = self.rebuild(inner)?;
        let now: BTreeMap<String, TrackSummary> =
            picture.tracks.iter().map(|t| (t.track_id.clone(), TrackSummary::from(t))).collect();
        for (id, t) in &now {
            if inner.tracks.get(id) != Some(t) {
                self.emit(NodeEvent::Track { track: t.clone() });
            }
        }
        for id in inner.tracks.keys().filter(|id| !now.contains_key(*id)) {
            self.emit(NodeEvent::TrackRemoved { track_id: id.clone() });
        }
        inner.tracks = now;
        *self.snapshot.write().expect("snapshot lock") = Arc::new(Snapshot { picture });
        if moved || shrunk {
            save_chain_dir(&self.config.data_dir.join("ledger"), inner.ledger.chain())
                .map_err(|e| ApiError::internal(e.to_string()))?;
        }
        Ok(())
    }

    fn persist_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), ApiError> {
        std::fs::create_dir_all(&self.config.data_dir).map_err(|e| ApiError::internal(e.to_string()))?;
        let bytes = serde_json::to_vec_pretty(value).expect("state serializes");
        std::fs::write(self.config.data_dir.join(name), bytes).map_err(|e| ApiError::internal(e.to_string()))
    }

    fn heights(inner: &Inner) -> BTreeSet<(u64, Digest)> {
        inner.ledger.chain().iter().map(|b| (b.height, b.block_hash)).collect()
    }

    /// Verifies, seals and appends a submitted message. Civilian relay
    /// submissions are anonymized and re-signed by this node first.
    pub fn submit(&self, session: &ApiSession, req: SubmitRequest) -> Result<SubmitResponse, ApiError> {
        session.require(Operation::Submit)?;
        req.message.validate()?;
        let mut inner = self.lock();
        let before = Node::heights(&inner);
        let group = match &req.group {
            None => None,
            Some(g) => Some(inner.keyring.get(g).cloned().ok_or_else(|| {
                ApiError::bad_request("UnknownGroup", format!("this node holds no key for group `{g}`"))
            })?),
        };
        let anonymized = session.anonymizes();
        let envelope = if anonymized {
            if let (Some(sig), Some(key)) = (&req.signature, inner.registry.get(&req.message.originator_id)) {
                let digest = req.message.digest()?;
                if !key.verify(digest.as_bytes(), sig) {
                    return Err(ApiError::new(
                        axum::http::StatusCode::UNAUTHORIZED,
                        "RejectedSignature",
                        format!("signature of {} does not verify", req.message.originator_id),
                    ));
                }
            }
            let Inner { rng, pseudonyms, .. } = &mut *inner;
            let anon = anonymize(&req.message, self.config.epsilon, pseudonyms, rng)?;
            let node_key = inner.ledger.keypair().clone();
            inner.registry.register(&anon.originator_id, node_key.public());
            seal(&anon, &node_key, group.as_ref())?
        } else {
            let sig = req.signature.ok_or_else(|| {
                ApiError::new(axum::http::StatusCode::UNAUTHORIZED, "RejectedSignature", "signature is required")
            })?;
            seal_signed(&req.message, sig, group.as_ref())?
        };
        let originator_id = envelope.originator_id.clone();
        let now = self.now();
        let Inner { ledger, registry, .. } = &mut *inner;
        let entry = ledger.append(envelope, registry, now)?;
        let block_height = ledger
            .chain()
            .iter()
            .find(|b| b.entries.iter().any(|e| e.entry_id == entry.entry_id))
            .map_or(0, |b| b.height);
        self.commit(&mut inner, &before, false)?;
        if anonymized {
            self.persist_json("registry.json", &inner.registry)?;
        }
        Ok(SubmitResponse {
            digest: entry.envelope.digest,
            entry_id: entry.entry_id,
            received_at: entry.received_at,
            originator_id,
            anonymized,
            block_height,
        })
    }

    /// Blocks from height `from` onwards.
    pub fn blocks(&self, from: u64) -> Vec<Block> {
        self.lock().ledger.chain().iter().skip(from as usize).cloned().collect()
    }

    pub fn audit(&self, digest: &Digest) -> Result<Vec<AuditEvent>, ApiError> {
        let inner = self.lock();
        Ok(audit_trail(inner.ledger.chain(), digest, &inner.keyring)?)
    }

    /// Route risks against the current picture. Mutates nothing.
    pub fn whatif(&self, req: &WhatIfRequest) -> Result<RiskAssessment, ApiError> {
        let snapshot = self.snapshot();
        Ok(assess_routes(&req.routes, &snapshot.picture.tracks, req.lambda_km.unwrap_or(self.config.lambda_km))?)
    }

    pub fn feedback(&self, session: &ApiSession, source_id: &str, outcome: Outcome) -> Result<TrustResponse, ApiError> {
        session.require(Operation::Tune)?;
        let mut inner = self.lock();
        if inner.profiles.get(source_id).is_none() {
            return Err(ApiError::not_found("UnknownSource", format!("no source `{source_id}`")));
        }
        let profile = inner.profiles.apply_feedback(source_id, outcome).clone();
        let response =
            TrustResponse { source_id: source_id.to_owned(), trust: profile.trust(), evidence: profile.evidence };
        self.emit(NodeEvent::Trust { source_id: source_id.to_owned(), trust: response.trust });
        let before = Node::heights(&inner);
        self.commit(&mut inner, &before, true)?;
        self.persist_json("profiles.json", &inner.profiles)?;
        Ok(response)
    }

    /// Runs the gate over a percept, cross-checks it against the picture and
    /// appends signed conflict evidence. Resolves the engagement case when
    /// both ground truth and an operator assessment are supplied.
    pub fn perceive(&self, session: &ApiSession, req: PerceptRequest) -> Result<PerceptResponse, ApiError> {
        session.require(Operation::Perceive)?;
        let [lat, lon] = req.location;
        if !((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)) {
            return Err(ApiError::bad_request("FieldOutOfRange", format!("location [{lat}, {lon}] is off the globe")));
        }
        let provenance = req.model.unwrap_or_else(default_model);
        let (machine, seen) = perceive_stream(provenance, req.detections, &self.config.gate);
        let snapshot = self.snapshot();
        let check = cross_check(&machine, &seen, &snapshot.picture, req.location, &self.config.gate);
        let now = self.now();
        let evidence = match evidence_message(&self.config.node_id, &check, req.location, now) {
            None => None,
            Some(msg) => {
                let mut inner = self.lock();
                let before = Node::heights(&inner);
                let envelope = seal(&msg, inner.ledger.keypair(), None)?;
                let Inner { ledger, registry, .. } = &mut *inner;
                let entry = ledger.append(envelope, registry, now)?;
                self.commit(&mut inner, &before, false)?;
                Some(entry.envelope.digest)
            }
        };
        if check.is_conflict() {
            self.emit(NodeEvent::Conflict {
                label: req.label.clone(),
                location: req.location,
                check: check.clone(),
                evidence,
            });
        }
        let engagement = match (req.truth, req.operator) {
            (Some(truth), Some(op)) => {
                let case = resolve_engagement(truth, &PerceptionState::operator(op.assessment, op.note), &machine);
                self.emit(NodeEvent::Engagement { label: req.label.clone(), case: case.clone() });
                Some(case)
            }
            _ => None,
        };
        Ok(PerceptResponse { label: req.label, machine, check, evidence, engagement })
    }

    fn known_peer(&self, peer: &str) -> Result<(), ApiError> {
        if self.config.peers.iter().any(|p| p.id == peer) {
            Ok(())
        } else {
            Err(ApiError::forbidden(format!("`{peer}` is not a configured peer")).with_code("UnknownPeer"))
        }
    }

    /// Server side of a sync: merges the peer's chain and returns the merged chain.
    pub fn exchange(&self, session: &ApiSession, req: SyncRequest) -> Result<SyncResponse, ApiError> {
        session.require(Operation::Sync)?;
        self.absorb(&req.node_id, &req.blocks)?;
        Ok(SyncResponse { node_id: self.config.node_id.clone(), blocks: self.chain() })
    }

    /// Merges a chain received from a configured peer.
    pub fn absorb(&self, peer: &str, blocks: &[Block]) -> Result<SyncOutcome, ApiError> {
        self.known_peer(peer)?;
        let now = self.now();
        let mut inner = self.lock();
        let before = Node::heights(&inner);
        inner.ledger.set_link(peer, LinkState::Up);
        let outcome = inner.ledger.accept_peer_chain(peer, blocks, now)?;
        self.commit(&mut inner, &before, false)?;
        Ok(outcome)
    }

    pub fn set_link(&self, peer: &str, state: LinkState) {
        self.lock().ledger.set_link(peer, state);
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}
