#![allow(dead_code)]

use chrono::{DateTime, Duration, TimeZone, Utc};
use pause_core::codec::{seal, subjects_for, Envelope, GeoShape, MessageCategory, RefIndicator, WfMessage, SUBJECTS};
use pause_core::crypto::{Digest, KeyRegistry, Keypair};
use pause_core::ledger::{Block, LedgerEntry, LedgerNode, LinkState};
use pause_core::picture::geo::EARTH_RADIUS_KM;
use pause_core::picture::RouteOption;

pub const SOURCES: [&str; 3] = ["icrc", "moh", "msf"];

pub fn t(s: i64) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 3, 1, 0, 0, 0).unwrap() + Duration::seconds(s)
}

pub fn node_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

pub fn registry(nodes: &[String]) -> KeyRegistry {
    let mut r = KeyRegistry::new();
    for s in SOURCES {
        r.register(s, Keypair::derive(&format!("source:{s}")).public());
    }
    for n in nodes {
        r.register(n.clone(), Keypair::derive(&format!("node:{n}")).public());
    }
    r
}

/// A distinct signed message per `i`; timestamps collide across `i` on purpose.
pub fn envelope(i: u64) -> Envelope {
    let source = SOURCES[(i % 3) as usize];
    let m = WfMessage::new(source, MessageCategory::StatusSignal, 2, t((i % 7) as i64)).at(
        15.0 + i as f64 * 1e-3,
        44.0,
        (i % 1000) as u32,
    );
    seal(&m, &Keypair::derive(&format!("source:{source}")), None).unwrap()
}

pub fn mesh(ids: &[String], block_size: usize) -> Vec<LedgerNode> {
    ids.iter()
        .map(|id| {
            let mut n = LedgerNode::with_block_size(id.clone(), Keypair::derive(&format!("node:{id}")), block_size);
            for other in ids.iter().filter(|o| *o != id) {
                n.add_peer(other.clone(), LinkState::Up);
            }
            n
        })
        .collect()
}

pub fn pair(nodes: &mut [LedgerNode], i: usize, j: usize) -> (&mut LedgerNode, &mut LedgerNode) {
    assert_ne!(i, j);
    if i < j {
        let (l, r) = nodes.split_at_mut(j);
        (&mut l[i], &mut r[0])
    } else {
        let (l, r) = nodes.split_at_mut(i);
        (&mut r[0], &mut l[j])
    }
}

/// Expected chain: sort the multiset of all receipts by
/// (timestamp, digest, node, received_at), drop repeats, cut into blocks.
pub fn oracle_chain(mut entries: Vec<LedgerEntry>, block_size: usize) -> Vec<Block> {
    entries.sort_by(|a, b| {
        (a.envelope.timestamp, a.envelope.digest.0, &a.receiving_node, a.received_at).cmp(&(
            b.envelope.timestamp,
            b.envelope.digest.0,
            &b.receiving_node,
            b.received_at,
        ))
    });
    entries.dedup_by(|a, b| a.entry_id == b.entry_id);
    let mut prev = Digest::ZERO;
    entries
        .chunks(block_size)
        .enumerate()
        .map(|(h, batch)| {
            let b = Block::new(h as u64, prev, batch.to_vec());
            prev = b.block_hash;
            b
        })
        .collect()
}

/// A `blocks`-block chain on one node with `per_block` entries each.
pub fn chain_of(blocks: usize, per_block: usize) -> Vec<Block> {
    let ids = node_ids(1);
    let reg = registry(&ids);
    let mut node = LedgerNode::with_block_size("n0", Keypair::derive("node:n0"), per_block);
    for i in 0..(blocks * per_block) as u64 {
        node.append(envelope(i), &reg, t(100 + i as i64)).unwrap();
    }
    assert_eq!(node.chain().len(), blocks);
    node.chain().to_vec()
}

// Brute-force route risk: great-circle distance by golden-section search over
// the slerp parameter of each segment.

pub fn haversine_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (la, lb) = (a[0].to_radians(), b[0].to_radians());
    let dlat = lb - la;
    let dlon = (b[1] - a[1]).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la.cos() * lb.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().asin()
}

pub fn slerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    let v = |p: [f64; 2]| {
        let (la, lo) = (p[0].to_radians(), p[1].to_radians());
        [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
    };
    let (va, vb) = (v(a), v(b));
    let dot: f64 = (0..3).map(|i| va[i] * vb[i]).sum::<f64>().clamp(-1.0, 1.0);
    let omega = dot.acos();
    let p: Vec<f64> = if omega < 1e-12 {
        va.to_vec()
    } else {
        (0..3).map(|i| (((1.0 - t) * omega).sin() * va[i] + (t * omega).sin() * vb[i]) / omega.sin()).collect()
    };
    [p[2].atan2((p[0] * p[0] + p[1] * p[1]).sqrt()).to_degrees(), p[1].atan2(p[0]).to_degrees()]
}

pub fn oracle_segment_km(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let f = |t: f64| haversine_km(p, slerp(a, b, t));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) <= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    f((lo + hi) / 2.0).min(f(0.0)).min(f(1.0))
}

pub fn oracle_risk(route: &RouteOption, threats: &[(f64, f64, [f64; 2])], lambda: f64) -> f64 {
    threats
        .iter()
        .map(|(sev, e, pos)| {
            let d =
                route.polyline.windows(2).map(|w| oracle_segment_km(*pos, w[0], w[1])).fold(f64::INFINITY, f64::min);
            sev * e * (-d / lambda).exp()
        })
        .sum()
}

/// Changes one field of a valid message, keeping it valid.
pub fn mutate(m: &WfMessage, field: usize) -> WfMessage {
    let mut x = m.clone();
    match field {
        0 => x.originator_id.push('x'),
        1 => {
            let other = SUBJECTS.iter().find(|s| s.category != m.category && !s.category.carries_text()).unwrap();
            x.category = other.category;
            x.subject_code = other.code;
            x.payload_text = None;
            if x.reference_indicator == RefIndicator::Duress && !x.category.allows_duress() {
                x.reference_indicator = RefIndicator::Cancel;
            }
        }
        2 => {
            let next = subjects_for(m.category).into_iter().find(|s| s.code != m.subject_code).unwrap();
            x.subject_code = next.code;
        }
        3 => match m.reference_indicator {
            RefIndicator::New => x = x.referencing(RefIndicator::Acknowledge, Digest::ZERO),
            _ => {
                x.reference_indicator = if m.reference_indicator == RefIndicator::Update {
                    RefIndicator::Acknowledge
                } else {
                    RefIndicator::Update
                }
            }
        },
        4 => match x.referenced_hash.as_mut() {
            Some(h) => h.0[31] ^= 1,
            None => x = x.referencing(RefIndicator::Update, Digest::ZERO),
        },
        5 => {
            x.timestamp = if m.timestamp.timestamp() > 0 {
                Utc.timestamp_opt(m.timestamp.timestamp() - 1, 0).unwrap()
            } else {
                Utc.timestamp_opt(m.timestamp.timestamp() + 1, 0).unwrap()
            }
        }
        6 => {
            x.duration = match m.duration {
                None => Some(0),
                Some(d) => d.checked_add(1).or(None),
            }
        }
        7 => {
            x.geometry = match m.geometry {
                None => Some(GeoShape::from_fixed(0, 0, 0)),
                Some(g) if g.radius_m < u32::MAX => Some(GeoShape::from_fixed(g.lat_e5(), g.lon_e5(), g.radius_m + 1)),
                Some(g) => Some(GeoShape::from_fixed(g.lat_e5(), g.lon_e5(), 0)),
            }
        }
        8 => match &m.payload_text {
            Some(p) => x.payload_text = Some(format!("{p}.")),
            None => {
                let s = subjects_for(MessageCategory::FreeText)[0];
                x.category = s.category;
                x.subject_code = s.code;
                x.payload_text = Some(String::new());
                if x.reference_indicator == RefIndicator::Duress {
                    x.reference_indicator = RefIndicator::Cancel;
                }
            }
        },
        _ => unreachable!(),
    }
    x
}
