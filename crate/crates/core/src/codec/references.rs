use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{CodecError, RefIndicator, WfMessage};
use crate::crypto::Digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "by")]
pub enum EffectiveState {
    Active,
    Updated(Digest),
    Cancelled,
    UnderDuress,
}

impl EffectiveState {
    pub fn is_live(&self) -> bool {
        matches!(self, EffectiveState::Active | EffectiveState::UnderDuress)
    }
}

/// A sequence of messages linked by Update references, rooted at a New message
/// (or at an update whose target is unknown).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub root: Digest,
    pub head: Digest,
    pub originator_id: String,
    /// Chain versions in ledger order, root first.
    pub members: Vec<Digest>,
    pub cancelled: bool,
    pub duress: bool,
    /// Acknowledge messages pointing at any member.
    pub acknowledgements: Vec<Digest>,
    /// Cancel and Duress messages applied to this chain.
    pub controls: Vec<Digest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingReference {
    pub from: Digest,
    pub missing: Digest,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub states: BTreeMap<Digest, EffectiveState>,
    /// Chains in order of their root's first appearance.
    pub chains: Vec<Chain>,
    pub dangling: Vec<DanglingReference>,
    /// Update/Cancel/Duress messages whose originator differs from the target chain's.
    pub unauthorized: Vec<Digest>,
}

impl ReferenceReport {
    pub fn chain_of(&self, digest: &Digest) -> Option<&Chain> {
        self.chains
            .iter()
            .find(|c| c.members.contains(digest) || c.acknowledgements.contains(digest) || c.controls.contains(digest))
    }
}

/// Resolves reference chains over messages in ledger order.
///
/// Later references win. Duress flags a chain without ending it; a later Cancel
/// still cancels it. Only the chain's originator may update, cancel or flag
/// duress; anyone may acknowledge. Repeated digests are ignored after the first.
pub fn resolve_references(messages: &[WfMessage]) -> Result<ReferenceReport, CodecError> {
    let mut report = ReferenceReport::default();
    let mut seen = HashSet::new();
    let mut chain_index: BTreeMap<Digest, usize> = BTreeMap::new();

    for m in messages {
        let d = m.digest()?;
        if !seen.insert(d) {
            continue;
        }
        let target = m.referenced_hash.and_then(|h| chain_index.get(&h).copied().map(|ci| (h, ci)));
        if let (Some(h), None) = (m.referenced_hash, target) {
            report.dangling.push(DanglingReference { from: d, missing: h });
        }

        let authorized = |ci: usize, report: &ReferenceReport| report.chains[ci].originator_id == m.originator_id;

        match (m.reference_indicator, target) {
            (RefIndicator::Update, Some((_, ci))) if authorized(ci, &report) => {
                let chain = &mut report.chains[ci];
                report.states.insert(chain.head, EffectiveState::Updated(d));
                chain.head = d;
                chain.members.push(d);
                chain.cancelled = false;
                let state = if chain.duress { EffectiveState::UnderDuress } else { EffectiveState::Active };
                report.states.insert(d, state);
                chain_index.insert(d, ci);
            }
            (RefIndicator::Cancel, Some((_, ci))) if authorized(ci, &report) => {
                let chain = &mut report.chains[ci];
                chain.cancelled = true;
                chain.controls.push(d);
                for member in &chain.members {
                    if let Some(s) = report.states.get_mut(member) {
                        if s.is_live() {
                            *s = EffectiveState::Cancelled;
                        }
                    }
                }
            }
            (RefIndicator::Duress, Some((_, ci))) if authorized(ci, &report) => {
                let chain = &mut report.chains[ci];
                chain.duress = true;
                chain.controls.push(d);
                if let Some(s) = report.states.get_mut(&chain.head) {
                    if *s == EffectiveState::Active {
                        *s = EffectiveState::UnderDuress;
                    }
                }
            }
            (RefIndicator::Acknowledge, Some((_, ci))) => {
                report.chains[ci].acknowledgements.push(d);
            }
            (RefIndicator::Acknowledge | RefIndicator::Cancel | RefIndicator::Duress, None) => {}
            (RefIndicator::New | RefIndicator::Update, _) => {
                if m.reference_indicator == RefIndicator::Update && target.is_some() {
                    report.unauthorized.push(d);
                }
                let ci = report.chains.len();
                report.chains.push(Chain {
                    root: d,
                    head: d,
                    originator_id: m.originator_id.clone(),
                    members: vec![d],
                    cancelled: false,
                    duress: false,
                    acknowledgements: Vec::new(),
                    controls: Vec::new(),
                });
                report.states.insert(d, EffectiveState::Active);
                chain_index.insert(d, ci);
            }
            (RefIndicator::Cancel | RefIndicator::Duress, Some(_)) => {
                report.unauthorized.push(d);
            }
        }
    }
    Ok(report)
}
