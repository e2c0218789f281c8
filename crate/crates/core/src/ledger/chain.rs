use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Block, LedgerEntry};
use crate::codec::verify;
use crate::crypto::{Digest, KeyRegistry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakReason {
    HeightGap,
    PrevHashMismatch,
    BlockHashMismatch,
    EntryIdMismatch,
    EntryOrder,
    EmptyBlock,
    EnvelopeSignature,
    ReceiptSignature,
    Unreadable(String),
    NonCanonical,
}

impl std::fmt::Display for BreakReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BreakReason::Unreadable(e) => write!(f, "unreadable block: {e}"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum ChainVerification {
    Ok,
    Broken { broken_at: u64, reason: BreakReason },
}

impl ChainVerification {
    pub fn is_ok(&self) -> bool {
        matches!(self, ChainVerification::Ok)
    }

    pub fn broken_at(&self) -> Option<u64> {
        match self {
            ChainVerification::Ok => None,
            ChainVerification::Broken { broken_at, .. } => Some(*broken_at),
        }
    }
}

fn broken(at: usize, reason: BreakReason) -> ChainVerification {
    ChainVerification::Broken { broken_at: at as u64, reason }
}

/// Structural verification: heights dense from 0, hash linkage, recomputed
/// block hashes and entry ids, and canonical entry order. Reports the first
/// violation by chain position.
pub fn verify_chain(chain: &[Block]) -> ChainVerification {
    let mut prev = Digest::ZERO;
    let mut last_key = None;
    for (i, block) in chain.iter().enumerate() {
        if block.height != i as u64 {
            return broken(i, BreakReason::HeightGap);
        }
        if block.prev_hash != prev {
            return broken(i, BreakReason::PrevHashMismatch);
        }
        if block.entries.is_empty() {
            return broken(i, BreakReason::EmptyBlock);
        }
        if Block::compute_hash(block.height, &block.prev_hash, &block.entries) != block.block_hash {
            return broken(i, BreakReason::BlockHashMismatch);
        }
        for e in &block.entries {
            if e.recomputed_id() != e.entry_id {
                return broken(i, BreakReason::EntryIdMismatch);
            }
            let key = e.sort_key();
            if last_key.is_some_and(|k| k >= key) {
                return broken(i, BreakReason::EntryOrder);
            }
            last_key = Some(key);
        }
        prev = block.block_hash;
    }
    ChainVerification::Ok
}

/// [`verify_chain`] plus originator and receipt signatures against a registry.
pub fn verify_chain_signed(chain: &[Block], registry: &KeyRegistry) -> ChainVerification {
    let structural = verify_chain(chain);
    if !structural.is_ok() {
        return structural;
    }
    for (i, block) in chain.iter().enumerate() {
        for e in &block.entries {
            if !verify(&e.envelope, registry).signature_ok {
                return broken(i, BreakReason::EnvelopeSignature);
            }
            if !e.receipt_verifies(registry) {
                return broken(i, BreakReason::ReceiptSignature);
            }
        }
    }
    ChainVerification::Ok
}

/// Cuts canonically ordered entries into hash-linked blocks.
pub fn build_chain(mut entries: Vec<LedgerEntry>, block_size: usize) -> Vec<Block> {
    assert!(block_size > 0, "block size must be positive");
    entries.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    entries.dedup_by(|a, b| a.entry_id == b.entry_id);
    let mut blocks = Vec::with_capacity(entries.len().div_ceil(block_size));
    let mut prev = Digest::ZERO;
    let mut iter = entries.into_iter().peekable();
    let mut height = 0u64;
    while iter.peek().is_some() {
        let batch: Vec<LedgerEntry> = iter.by_ref().take(block_size).collect();
        let block = Block::new(height, prev, batch);
        prev = block.block_hash;
        blocks.push(block);
        height += 1;
    }
    blocks
}

/// Union of the entries of every chain (keyed by entry id), re-batched.
pub fn merge_chains(chains: &[&[Block]], block_size: usize) -> Vec<Block> {
    let mut all: BTreeMap<Digest, LedgerEntry> = BTreeMap::new();
    for chain in chains {
        for block in chain.iter() {
            for e in &block.entries {
                all.entry(e.entry_id).or_insert_with(|| e.clone());
            }
        }
    }
    build_chain(all.into_values().collect(), block_size)
}
