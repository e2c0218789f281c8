use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Duration, DurationRound, Utc};
use serde::{Deserialize, Serialize};

use super::chain::{build_chain, merge_chains, verify_chain, ChainVerification};
use super::{Block, LedgerEntry, LedgerError, LinkState, DEFAULT_BLOCK_SIZE};
use crate::codec::{verify, Envelope, WfMessage};
use crate::crypto::{Digest, KeyRegistry, Keypair, Keyring};

/// A refused merge, kept for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incident {
    pub peer: String,
    pub at: DateTime<Utc>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncOutcome {
    pub entries_before: usize,
    pub entries_after: usize,
    pub head: Option<Digest>,
}

impl SyncOutcome {
    pub fn changed(&self) -> bool {
        self.entries_before != self.entries_after
    }
}

/// One ledger replica. All mutation goes through `&mut self`, so a node has a
/// single writer by construction.
#[derive(Debug, Clone)]
pub struct LedgerNode {
    pub node_id: String,
    keypair: Keypair,
    chain: Vec<Block>,
    block_size: usize,
    pub peers: BTreeSet<String>,
    pub connectivity: BTreeMap<String, LinkState>,
    quarantined: BTreeSet<String>,
    incidents: Vec<Incident>,
    last_receipt: Option<DateTime<Utc>>,
}

impl LedgerNode {
    pub fn new(node_id: impl Into<String>, keypair: Keypair) -> LedgerNode {
        LedgerNode::with_block_size(node_id, keypair, DEFAULT_BLOCK_SIZE)
    }

    pub fn with_block_size(node_id: impl Into<String>, keypair: Keypair, block_size: usize) -> LedgerNode {
        assert!(block_size > 0, "block size must be positive");
        LedgerNode {
            node_id: node_id.into(),
            keypair,
            chain: Vec::new(),
            block_size,
            peers: BTreeSet::new(),
            connectivity: BTreeMap::new(),
            quarantined: BTreeSet::new(),
            incidents: Vec::new(),
            last_receipt: None,
        }
    }

    pub fn chain(&self) -> &[Block] {
        &self.chain
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn keypair(&self) -> &Keypair {
        &self.keypair
    }

    pub fn incidents(&self) -> &[Incident] {
        &self.incidents
    }

    pub fn is_quarantined(&self, peer: &str) -> bool {
        self.quarantined.contains(peer)
    }

    /// Operator action: accept chains from a quarantined peer again. Returns
    /// whether the peer was quarantined.
    pub fn release(&mut self, peer: &str) -> bool {
        self.quarantined.remove(peer)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.chain.iter().flat_map(|b| b.entries.iter())
    }

    pub fn entry_count(&self) -> usize {
        self.chain.iter().map(|b| b.entries.len()).sum()
    }

    pub fn head(&self) -> Option<Digest> {
        self.chain.last().map(|b| b.block_hash)
    }

    /// Hash of the whole chain, used to detect state changes.
    pub fn chain_digest(&self) -> Digest {
        Digest::of(&serde_json::to_vec(&self.chain).expect("chain serializes"))
    }

    pub fn add_peer(&mut self, peer: impl Into<String>, state: LinkState) {
        let peer = peer.into();
        self.peers.insert(peer.clone());
        self.connectivity.insert(peer, state);
    }

    pub fn set_link(&mut self, peer: &str, state: LinkState) {
        self.peers.insert(peer.to_owned());
        self.connectivity.insert(peer.to_owned(), state);
    }

    pub fn link(&self, peer: &str) -> LinkState {
        self.connectivity.get(peer).copied().unwrap_or(LinkState::Down)
    }

    /// Receipts a verified envelope. The receipt clock is whole seconds and
    /// strictly increasing per node, so every receipt gets a distinct entry id.
    pub fn append(
        &mut self,
        envelope: Envelope,
        registry: &KeyRegistry,
        now: DateTime<Utc>,
    ) -> Result<LedgerEntry, LedgerError> {
        if !verify(&envelope, registry).signature_ok {
            return Err(LedgerError::RejectedSignature(envelope.digest));
        }
        let mut received_at = now.duration_trunc(Duration::seconds(1)).unwrap_or(now);
        if let Some(last) = self.last_receipt {
            if received_at <= last {
                received_at = last + Duration::seconds(1);
            }
        }
        self.last_receipt = Some(received_at);
        let entry = LedgerEntry::receipt(envelope, &self.node_id, &self.keypair, received_at);
        self.insert(entry.clone());
        Ok(entry)
    }

    /// Places an entry at its canonical position, rebuilding only the blocks
    /// from that position onwards.
    fn insert(&mut self, entry: LedgerEntry) {
        let key = entry.sort_key();
        let first_affected = self
            .chain
            .iter()
            .position(|b| b.entries.last().is_some_and(|last| last.sort_key() > key))
            .unwrap_or(self.chain.len().saturating_sub(1));
        let mut tail: Vec<LedgerEntry> = self.chain.drain(first_affected..).flat_map(|b| b.entries).collect();
        tail.push(entry);
        tail.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut prev = self.chain.last().map(|b| b.block_hash).unwrap_or(Digest::ZERO);
        for batch in tail.chunks(self.block_size) {
            let block = Block::new(self.chain.len() as u64, prev, batch.to_vec());
            prev = block.block_hash;
            self.chain.push(block);
        }
    }

    /// Merges a peer's chain into this node's after verifying it. An invalid
    /// chain quarantines the peer and leaves this node untouched.
    pub fn accept_peer_chain(
        &mut self,
        peer: &str,
        peer_chain: &[Block],
        now: DateTime<Utc>,
    ) -> Result<SyncOutcome, LedgerError> {
        if self.quarantined.contains(peer) {
            return Err(LedgerError::PeerQuarantined(peer.to_owned()));
        }
        if let ChainVerification::Broken { broken_at, reason } = verify_chain(peer_chain) {
            self.quarantined.insert(peer.to_owned());
            self.incidents.push(Incident {
                peer: peer.to_owned(),
                at: now,
                detail: format!("chain broken at height {broken_at}: {reason}"),
            });
            return Err(LedgerError::InvalidPeerChain { peer: peer.to_owned(), at: broken_at, reason });
        }
        let before = self.entry_count();
        let merged = merge_chains(&[&self.chain, peer_chain], self.block_size);
        self.chain = merged;
        Ok(SyncOutcome { entries_before: before, entries_after: self.entry_count(), head: self.head() })
    }

    /// Replaces the chain wholesale; used when restoring from disk.
    pub fn install_chain(&mut self, chain: Vec<Block>) -> Result<(), LedgerError> {
        if let ChainVerification::Broken { broken_at, reason } = verify_chain(&chain) {
            return Err(LedgerError::InvalidPeerChain { peer: self.node_id.clone(), at: broken_at, reason });
        }
        let entries = chain.into_iter().flat_map(|b| b.entries).collect();
        self.chain = build_chain(entries, self.block_size);
        self.last_receipt = self.entries().filter(|e| e.receiving_node == self.node_id).map(|e| e.received_at).max();
        Ok(())
    }

    /// Envelopes with duplicate digests removed, in ledger order.
    pub fn logical_envelopes(&self) -> Vec<&Envelope> {
        let mut seen = HashSet::new();
        self.entries().map(|e| &e.envelope).filter(|env| seen.insert(env.digest)).collect()
    }

    /// Every message this node can read, deduplicated, in ledger order.
    pub fn readable_messages(&self, keyring: &Keyring) -> Vec<(Digest, WfMessage)> {
        super::readable_messages(&self.chain, keyring)
    }
}

/// Bidirectional sync over an up link: both nodes end with the identical merged chain.
pub fn sync(a: &mut LedgerNode, b: &mut LedgerNode, now: DateTime<Utc>) -> Result<SyncOutcome, LedgerError> {
    if a.link(&b.node_id) != LinkState::Up {
        return Err(LedgerError::LinkDown(b.node_id.clone()));
    }
    if b.link(&a.node_id) != LinkState::Up {
        return Err(LedgerError::LinkDown(a.node_id.clone()));
    }
    let b_chain = b.chain.clone();
    let b_id = b.node_id.clone();
    let a_before = a.entry_count();
    a.accept_peer_chain(&b_id, &b_chain, now)?;
    let a_chain = a.chain.clone();
    let a_id = a.node_id.clone();
    b.accept_peer_chain(&a_id, &a_chain, now)?;
    Ok(SyncOutcome { entries_before: a_before, entries_after: a.entry_count(), head: a.head() })
}

impl LedgerNode {
    pub fn sync_with(&mut self, other: &mut LedgerNode, now: DateTime<Utc>) -> Result<SyncOutcome, LedgerError> {
        sync(self, other, now)
    }
}
