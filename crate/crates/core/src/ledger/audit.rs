use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{receipt_message, Block, LedgerError};
use crate::codec::{open, RefIndicator};
use crate::crypto::{Digest, KeyRegistry, Keyring, SignatureBytes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditEventKind {
    Receipt,
    Update,
    Cancel,
    Acknowledge,
    Duress,
}

/// One receipted event touching a message. `message` is the digest of the
/// envelope the receipt covers: the audited message itself for `Receipt`, the
/// referencing message otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub event: AuditEventKind,
    pub message: Digest,
    pub node: String,
    pub time: DateTime<Utc>,
    pub signature: SignatureBytes,
}

impl AuditEvent {
    pub fn verify(&self, registry: &KeyRegistry) -> bool {
        registry
            .get(&self.node)
            .is_some_and(|k| k.verify(receipt_message(&self.message, &self.time).as_bytes(), &self.signature))
    }
}

/// Every receipt of `digest` and every receipt of a readable message that
/// references it, in ledger order.
pub fn audit_trail(chain: &[Block], digest: &Digest, keyring: &Keyring) -> Result<Vec<AuditEvent>, LedgerError> {
    let mut events = Vec::new();
    let mut known = false;
    for entry in chain.iter().flat_map(|b| b.entries.iter()) {
        let env = &entry.envelope;
        let kind = if env.digest == *digest {
            known = true;
            Some(AuditEventKind::Receipt)
        } else {
            open(env, keyring).ok().filter(|m| m.referenced_hash.as_ref() == Some(digest)).map(|m| {
                match m.reference_indicator {
                    RefIndicator::Update => AuditEventKind::Update,
                    RefIndicator::Cancel => AuditEventKind::Cancel,
                    RefIndicator::Acknowledge => AuditEventKind::Acknowledge,
                    RefIndicator::Duress => AuditEventKind::Duress,
                    RefIndicator::New => unreachable!("New messages carry no reference"),
                }
            })
        };
        if let Some(event) = kind {
            events.push(AuditEvent {
                event,
                message: env.digest,
                node: entry.receiving_node.clone(),
                time: entry.received_at,
                signature: entry.receipt_signature,
            });
        }
    }
    if known {
        Ok(events)
    } else {
        Err(LedgerError::UnknownDigest(*digest))
    }
}
