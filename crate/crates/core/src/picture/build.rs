use std::collections::{BTreeMap, BTreeSet};

use super::{geo, EntityTrack, Picture, PictureConfig, PictureError, TrackKind};
use crate::codec::{resolve_references, Chain, EffectiveState, WfMessage};
use crate::crypto::{Digest, Keyring};
use crate::ledger::{readable_messages, Block};
use crate::trust::{fuse_hypothesis_traced, DiversityModel, Opinion, Profiles, Report};

/// Builds the picture from every message in `chain` readable with `keyring`.
/// The chain is expected to be verified already.
pub fn build_picture(
    chain: &[Block],
    keyring: &Keyring,
    profiles: &Profiles,
    model: &DiversityModel,
    config: &PictureConfig,
) -> Result<Picture, PictureError> {
    let messages = readable_messages(chain, keyring);
    let mut picture = build_picture_from_messages(&messages, profiles, model, config)?;
    picture.ledger_head = chain.last().map(|b| b.block_hash);
    Ok(picture)
}

struct Pending<'a> {
    anchor: &'a Chain,
    kind: TrackKind,
    position: [f64; 2],
    chains: Vec<&'a Chain>,
}

/// Builds the picture from messages in ledger order.
///
/// Each live reference chain is located at its head. Chains of the same kind
/// within the merge radius of an existing track's anchor join that track;
/// otherwise they start a new one. A track's hypothesis is fused from one
/// asserting report per chain plus one per acknowledgement.
pub fn build_picture_from_messages(
    messages: &[(Digest, WfMessage)],
    profiles: &Profiles,
    model: &DiversityModel,
    config: &PictureConfig,
) -> Result<Picture, PictureError> {
    let plain: Vec<WfMessage> = messages.iter().map(|(_, m)| m.clone()).collect();
    let refs = resolve_references(&plain)?;
    let by_digest: BTreeMap<Digest, &WfMessage> = messages.iter().map(|(d, m)| (*d, m)).collect();
    let radius_km = config.merge_radius_m / 1000.0;

    let mut pending: Vec<Pending> = Vec::new();
    for chain in refs.chains.iter().filter(|c| !c.cancelled) {
        let head = by_digest[&chain.head];
        let (Some(kind), Some(geometry)) = (TrackKind::of_message(head), head.geometry) else { continue };
        let position = [geometry.latitude(), geometry.longitude()];
        match pending.iter_mut().find(|p| p.kind == kind && geo::distance_km(p.position, position) <= radius_km) {
            Some(p) => p.chains.push(chain),
            None => pending.push(Pending { anchor: chain, kind, position, chains: vec![chain] }),
        }
    }

    let certain = Opinion::certain(config.base_rate);
    let mut tracks = Vec::with_capacity(pending.len());
    for p in pending {
        let track_id = format!("trk-{}", p.anchor.root.short());
        let mut reports = Vec::new();
        let mut contributing = BTreeSet::new();
        let mut severity: Option<f64> = None;
        let mut duress = false;
        for chain in &p.chains {
            let head = by_digest[&chain.head];
            reports.push(Report {
                source_id: chain.originator_id.clone(),
                hypothesis_id: track_id.clone(),
                opinion: certain,
                cost: 0.0,
                ledger_digest: chain.head,
            });
            for ack in &chain.acknowledgements {
                reports.push(Report {
                    source_id: by_digest[ack].originator_id.clone(),
                    hypothesis_id: track_id.clone(),
                    opinion: certain,
                    cost: 0.0,
                    ledger_digest: *ack,
                });
            }
            contributing.extend(chain.members.iter().chain(&chain.acknowledgements).chain(&chain.controls).copied());
            if p.kind == TrackKind::Threat {
                let s = config.severity.of(head.subject_code);
                severity = Some(severity.map_or(s, |x: f64| x.max(s)));
            }
            duress |= chain.duress;
        }
        let fusion = fuse_hypothesis_traced(&reports, profiles, model)?;
        let anchor_head = by_digest[&p.anchor.head];
        let last_update = contributing.iter().map(|d| by_digest[d].timestamp).max().unwrap_or(anchor_head.timestamp);
        tracks.push(EntityTrack {
            track_id,
            kind: p.kind,
            label: anchor_head.subject().map_or("unknown", |s| s.name).to_owned(),
            location: anchor_head.geometry.expect("anchor has geometry"),
            opinion: fusion.result,
            expected: fusion.result.expected(),
            severity,
            contributing,
            last_update,
            status: if duress { EffectiveState::UnderDuress } else { EffectiveState::Active },
            fusion,
        });
    }
    Ok(Picture { ledger_head: None, tracks })
}
