//! Per-node append-only hash-chained ledger of sealed messages with signed
//! receipts, tamper detection and deterministic re-synchronisation.
//!
//! The chain is a pure function of the set of entries a node holds: entries are
//! totally ordered by `(envelope timestamp, envelope digest, receiving node,
//! received_at)` and cut into blocks of a fixed size. Merging two chains is set
//! union followed by re-batching, which makes it commutative, associative and
//! idempotent.

mod audit;
mod chain;
mod link;
mod node;
mod store;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::{open, Envelope, WfMessage};
use crate::crypto::{Digest, KeyRegistry, Keypair, Keyring, SignatureBytes};

pub use audit::{audit_trail, AuditEvent, AuditEventKind};
pub use chain::{build_chain, merge_chains, verify_chain, verify_chain_signed, BreakReason, ChainVerification};
pub use link::{LinkSchedule, LinkSpec, LinkState};
pub use node::{sync, Incident, LedgerNode, SyncOutcome};
pub use store::{load_chain_dir, save_chain_dir, verify_chain_dir, StoreError};

pub const DEFAULT_BLOCK_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("envelope {0} rejected: signature does not verify")]
    RejectedSignature(Digest),
    #[error("peer `{peer}` offered an invalid chain (broken at height {at}: {reason})")]
    InvalidPeerChain { peer: String, at: u64, reason: BreakReason },
    #[error("peer `{0}` is quarantined")]
    PeerQuarantined(String),
    #[error("link to `{0}` is down")]
    LinkDown(String),
    #[error("no ledger entry for digest {0}")]
    UnknownDigest(Digest),
}

impl LedgerError {
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::RejectedSignature(_) => "RejectedSignature",
            LedgerError::InvalidPeerChain { .. } => "InvalidPeerChain",
            LedgerError::PeerQuarantined(_) => "PeerQuarantined",
            LedgerError::LinkDown(_) => "LinkDown",
            LedgerError::UnknownDigest(_) => "UnknownDigest",
        }
    }
}

/// A receipted envelope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    pub envelope: Envelope,
    pub receiving_node: String,
    pub received_at: DateTime<Utc>,
    pub receipt_signature: SignatureBytes,
    pub entry_id: Digest,
}

pub(crate) fn time_bytes(t: &DateTime<Utc>) -> Vec<u8> {
    t.timestamp().to_be_bytes().to_vec()
}

/// The bytes a node signs to receipt an envelope.
pub fn receipt_message(digest: &Digest, received_at: &DateTime<Utc>) -> Digest {
    Digest::of_parts(&[b"pause-receipt", digest.as_bytes(), &time_bytes(received_at)])
}

pub fn entry_id(digest: &Digest, receiving_node: &str, received_at: &DateTime<Utc>) -> Digest {
    Digest::of_parts(&[b"pause-entry", digest.as_bytes(), receiving_node.as_bytes(), &time_bytes(received_at)])
}

impl LedgerEntry {
    pub fn receipt(envelope: Envelope, node_id: &str, node_key: &Keypair, received_at: DateTime<Utc>) -> LedgerEntry {
        let receipt_signature = node_key.sign(receipt_message(&envelope.digest, &received_at).as_bytes());
        let entry_id = entry_id(&envelope.digest, node_id, &received_at);
        LedgerEntry { envelope, receiving_node: node_id.to_owned(), received_at, receipt_signature, entry_id }
    }

    pub fn recomputed_id(&self) -> Digest {
        entry_id(&self.envelope.digest, &self.receiving_node, &self.received_at)
    }

    /// Hash over the entry's full serialized form.
    pub fn content_hash(&self) -> Digest {
        Digest::of(&serde_json::to_vec(self).expect("entry serializes"))
    }

    pub fn receipt_verifies(&self, registry: &KeyRegistry) -> bool {
        registry.get(&self.receiving_node).is_some_and(|k| {
            k.verify(receipt_message(&self.envelope.digest, &self.received_at).as_bytes(), &self.receipt_signature)
        })
    }

    /// Canonical merge order.
    pub fn sort_key(&self) -> (DateTime<Utc>, Digest, &str, DateTime<Utc>) {
        (self.envelope.timestamp, self.envelope.digest, self.receiving_node.as_str(), self.received_at)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub height: u64,
    pub prev_hash: Digest,
    pub entries: Vec<LedgerEntry>,
    pub block_hash: Digest,
}

impl Block {
    /// Commits to height, predecessor, each entry id and each entry's full content.
    pub fn compute_hash(height: u64, prev_hash: &Digest, entries: &[LedgerEntry]) -> Digest {
        let height_bytes = height.to_be_bytes();
        let mut leaves: Vec<[u8; 32]> = Vec::with_capacity(entries.len() * 2);
        for e in entries {
            leaves.push(e.entry_id.0);
            leaves.push(e.content_hash().0);
        }
        let mut parts: Vec<&[u8]> = vec![b"pause-block", &height_bytes, prev_hash.as_bytes()];
        parts.extend(leaves.iter().map(|l| l.as_slice()));
        Digest::of_parts(&parts)
    }

    pub fn new(height: u64, prev_hash: Digest, entries: Vec<LedgerEntry>) -> Block {
        let block_hash = Block::compute_hash(height, &prev_hash, &entries);
        Block { height, prev_hash, entries, block_hash }
    }
}

/// Every message in the chain readable with `keyring`, deduplicated by digest,
/// in ledger order.
pub fn readable_messages(chain: &[Block], keyring: &Keyring) -> Vec<(Digest, WfMessage)> {
    let mut seen = std::collections::HashSet::new();
    chain
        .iter()
        .flat_map(|b| &b.entries)
        .filter(|e| seen.insert(e.envelope.digest))
        .filter_map(|e| open(&e.envelope, keyring).ok().map(|m| (e.envelope.digest, m)))
        .collect()
}
