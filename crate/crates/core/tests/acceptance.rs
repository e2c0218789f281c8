//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use common::*;
use pause_core::codec::*;
use pause_core::crypto::Digest;
use pause_core::gate::{resolve_engagement, ConflictCode, Perceiver, PerceptionState, Protection};
use pause_core::ledger::*;
use pause_core::picture::{anonymize, build_picture, geo::KM_PER_DEG, Pseudonymizer, TrackKind};
use pause_core::scenario::{bundled, run};
use pause_core::trust::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "engagement table reproduction",
            budget: Some(Duration::from_secs(1)),
            check: c1_engagement_table,
        },
        Criterion { id: 2, name: "machine protection safety net", budget: None, check: c2_safety_net },
        Criterion {
            id: 3,
            name: "codec round-trip and digest determinism",
            budget: Some(Duration::from_secs(10)),
            check: c3_codec,
        },
        Criterion { id: 4, name: "tamper evidence", budget: Some(Duration::from_secs(10)), check: c4_tamper },
        Criterion {
            id: 5,
            name: "partition convergence",
            budget: Some(Duration::from_secs(60)),
            check: c5_convergence,
        },
        Criterion { id: 6, name: "collusion resistance", budget: Some(Duration::from_secs(10)), check: c6_collusion },
        Criterion { id: 7, name: "fusion algebra", budget: None, check: c7_algebra },
        Criterion { id: 8, name: "case 2 route choice", budget: Some(Duration::from_secs(5)), check: c8_routes },
        Criterion { id: 9, name: "case 3 misinformation", budget: Some(Duration::from_secs(5)), check: c9_misinfo },
        Criterion {
            id: 10,
            name: "case 1 traceability",
            budget: Some(Duration::from_secs(5)),
            check: c10_traceability,
        },
        Criterion { id: 11, name: "location anonymisation", budget: None, check: c11_anonymisation },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => {
                Err(format!("took {:.2}s, budget {:.0}s", elapsed.as_secs_f64(), b.as_secs_f64()))
            }
            (r, _) => r,
        };
        let budget = c.budget.map_or(String::new(), |b| format!(" / {:.0}s", b.as_secs_f64()));
        match result {
            Ok(detail) => println!("PASS {:>2} {}: {detail} [{:.2}s{budget}]", c.id, c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {}: {detail} [{:.2}s{budget}]", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// 1, 2: engagement table.

fn protection(cell: &str) -> Protection {
    match cell.to_ascii_lowercase().replace(' ', "").as_str() {
        "protected" => Protection::Protected,
        "notprotected" => Protection::NotProtected,
        other => panic!("unexpected protection cell {other:?}"),
    }
}

/// The decision-state table in its published tab-separated form.
fn published_table() -> Vec<(Protection, Protection, Protection, String, String)> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../paper.md")).unwrap();
    let mut lines = text.lines().skip_while(|l| !l.starts_with("Truth\tOperator Perceived"));
    lines.next().expect("table header");
    lines
        .take_while(|l| l.split('\t').count() == 5)
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (protection(c[0]), protection(c[1]), protection(c[2]), c[3].to_owned(), c[4].to_owned())
        })
        .collect()
}

fn csv_table() -> Vec<(Protection, Protection, Protection, String, String)> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/engagement_table.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (protection(&r[0]), protection(&r[1]), protection(&r[2]), r[3].to_owned(), r[4].to_owned())
        })
        .collect()
}

fn machine(p: Protection) -> PerceptionState {
    PerceptionState { perceiver: Perceiver::Machine, assessment: p, rationale: Vec::new() }
}

fn c1_engagement_table() -> Outcome {
    let published = published_table();
    ensure!(published.len() == 8, "published table has {} rows", published.len());
    ensure!(published == csv_table(), "data/engagement_table.csv differs from the published table");
    for (truth, op, m, state, consequence) in &published {
        let c = resolve_engagement(*truth, &PerceptionState::operator(*op, "scripted"), &machine(*m));
        ensure!(
            &c.state == state && &c.consequence == consequence,
            "{truth:?}/{op:?}/{m:?}: got {:?} / {:?}",
            c.state,
            c.consequence
        );
    }
    Ok("8/8 rows match state and consequence strings".into())
}

fn c2_safety_net() -> Outcome {
    let all = [Protection::Protected, Protection::NotProtected];
    let mut cases = 0;
    for truth in all {
        for op in all {
            for m in all {
                let c = resolve_engagement(truth, &PerceptionState::operator(op, ""), &machine(m));
                cases += 1;
                ensure!(!(m == Protection::Protected && c.engaged), "{truth:?}/{op:?}/{m:?} engaged");
                ensure!(
                    c.engaged == (op == Protection::NotProtected && m == Protection::NotProtected),
                    "{truth:?}/{op:?}/{m:?}"
                );
            }
        }
    }
    Ok(format!("{cases}/8 inputs, no engagement when the machine perceives protection"))
}

// 3: codec.

fn random_message(rng: &mut ChaCha8Rng) -> WfMessage {
    const ALPHABET: &[char] = &['a', 'z', '0', '9', '-', ':', '_', 'é', 'ß', '漢', ' ', '\t', '|', ',', '\u{1e}'];
    let subject = SUBJECTS.choose(rng).unwrap();
    let id: String =
        (0..rng.gen_range(1..16)).map(|_| ['a', 'q', 'z', '0', '7', '-', ':', '_'][rng.gen_range(0..8)]).collect();
    let secs = rng.gen_range(-62_135_596_800i64..253_402_300_799);
    let mut m = WfMessage::new(id, subject.category, subject.code, Utc.timestamp_opt(secs, 0).unwrap());
    let mut indicator = *RefIndicator::ALL.choose(rng).unwrap();
    if indicator == RefIndicator::Duress && !subject.category.allows_duress() {
        indicator = RefIndicator::Acknowledge;
    }
    if indicator != RefIndicator::New {
        m = m.referencing(indicator, Digest(rng.gen()));
    }
    if rng.gen_bool(0.5) {
        m.duration = Some(rng.gen());
    }
    if rng.gen_bool(0.7) {
        m.geometry = Some(GeoShape::from_fixed(
            rng.gen_range(-9_000_000..=9_000_000),
            rng.gen_range(-18_000_000..=18_000_000),
            rng.gen(),
        ));
    }
    if subject.category.carries_text() {
        m.payload_text = Some((0..rng.gen_range(0..40)).map(|_| *ALPHABET.choose(rng).unwrap()).collect());
    }
    m
}

fn c3_codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut round_trips, mut mutations) = (0, 0);
    for i in 0..10_000 {
        let m = random_message(&mut rng);
        let bytes = encode(&m).map_err(|e| format!("message {i}: {e}"))?;
        ensure!(decode(&bytes).as_ref() == Ok(&m), "message {i} failed to round-trip");
        ensure!(encode(&m).unwrap() == bytes, "message {i}: encoding not deterministic");
        round_trips += 1;
        let d = Digest::of(&bytes);
        for field in 0..9 {
            let x = mutate(&m, field);
            if x == m {
                continue;
            }
            ensure!(x.digest().map_err(|e| e.to_string())? != d, "message {i}: field {field} change kept the digest");
            mutations += 1;
        }
    }
    Ok(format!("{round_trips} round-trips, 0 failures; {mutations} single-field mutations all changed the digest"))
}

// 4: tamper evidence.

fn c4_tamper() -> Outcome {
    let chain = chain_of(10, 3);
    ensure!(verify_chain(&chain).is_ok(), "fresh chain does not verify");
    let dir = tempfile::tempdir().unwrap();
    save_chain_dir(dir.path(), &chain).unwrap();
    let files: Vec<Vec<u8>> =
        (0..10).map(|h| std::fs::read(dir.path().join(format!("{h:08}.json"))).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut structural, mut unparseable) = (0, 0);
    let trials = 600;
    for trial in 0..trials {
        let h = rng.gen_range(0..10usize);
        let mut bytes = files[h].clone();
        let i = rng.gen_range(0..bytes.len());
        bytes[i] ^= rng.gen_range(1..=255u8);
        let path = dir.path().join(format!("{h:08}.json"));
        std::fs::write(&path, &bytes).unwrap();
        let verdict = verify_chain_dir(dir.path()).unwrap();
        std::fs::write(&path, &files[h]).unwrap();
        ensure!(verdict.broken_at() == Some(h as u64), "trial {trial}: byte {i} of block {h} gave {verdict:?}");
        match verdict {
            ChainVerification::Broken { reason: BreakReason::Unreadable(_) | BreakReason::NonCanonical, .. } => {
                unparseable += 1
            }
            _ => structural += 1,
        }
    }
    ensure!(verify_chain_dir(dir.path()).unwrap().is_ok(), "restored chain does not verify");

    // Field-level mutations of parsed blocks, caught by hash recomputation alone.
    let fields = 500;
    for trial in 0..fields {
        let mut c = chain.clone();
        let h = rng.gen_range(0..10usize);
        let b = &mut c[h];
        let k = rng.gen_range(0..b.entries.len());
        let e = &mut b.entries[k];
        let bit = 1u8 << rng.gen_range(0..8);
        match rng.gen_range(0..10) {
            0 => b.block_hash.0[rng.gen_range(0..32)] ^= bit,
            1 => b.prev_hash.0[rng.gen_range(0..32)] ^= bit,
            2 => e.entry_id.0[rng.gen_range(0..32)] ^= bit,
            3 => e.receipt_signature.0[rng.gen_range(0..64)] ^= bit,
            4 => e.envelope.digest.0[rng.gen_range(0..32)] ^= bit,
            5 => e.envelope.signature.0[rng.gen_range(0..64)] ^= bit,
            6 => {
                let n = e.envelope.canonical_bytes.len();
                e.envelope.canonical_bytes[rng.gen_range(0..n)] ^= bit;
            }
            7 => e.received_at += chrono::Duration::seconds(1),
            8 => e.envelope.originator_id.push('x'),
            _ => e.receiving_node.push('x'),
        }
        let verdict = verify_chain(&c);
        ensure!(verdict.broken_at() == Some(h as u64), "field trial {trial} in block {h} gave {verdict:?}");
    }
    Ok(format!(
        "{trials}/{trials} file byte mutations ({structural} by hash linkage, {unparseable} unreadable) and {fields}/{fields} field mutations detected at the mutated height"
    ))
}

// 5: partition convergence.

/// Set partitions of three nodes.
const SHAPES: [[usize; 3]; 5] = [[0, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 1], [0, 1, 2]];
const EDGES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn set_partition(nodes: &mut [LedgerNode], groups: &[usize]) {
    let ids: Vec<String> = nodes.iter().map(|n| n.node_id.clone()).collect();
    for (i, n) in nodes.iter_mut().enumerate() {
        for (j, other) in ids.iter().enumerate() {
            if i != j {
                n.set_link(other, if groups[i] == groups[j] { LinkState::Up } else { LinkState::Down });
            }
        }
    }
}

fn chain_bytes(n: &LedgerNode) -> Vec<u8> {
    serde_json::to_vec(n.chain()).unwrap()
}

fn c5_convergence() -> Outcome {
    let ids = node_ids(3);
    let reg = registry(&ids);
    let mut orders = 0;
    for shape in SHAPES {
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let mut nodes = mesh(&ids, 4);
            set_partition(&mut nodes, &shape);
            let mut receipts = Vec::new();
            let shared = envelope(999);
            for (k, node) in nodes.iter_mut().enumerate() {
                for i in 0..4u64 {
                    receipts.push(node.append(envelope(10 * k as u64 + i), &reg, t(i as i64)).unwrap());
                }
                receipts.push(node.append(shared.clone(), &reg, t(9)).unwrap());
            }
            for (a, b) in EDGES {
                let (x, y) = pair(&mut nodes, a, b);
                match sync(x, y, t(10)) {
                    Ok(_) => ensure!(shape[a] == shape[b], "sync across a partition"),
                    Err(LedgerError::LinkDown(_)) => ensure!(shape[a] != shape[b], "link within a group is down"),
                    Err(e) => return Err(e.to_string()),
                }
            }
            set_partition(&mut nodes, &[0, 0, 0]);
            for &e in &perm {
                let (a, b) = EDGES[e];
                let (x, y) = pair(&mut nodes, a, b);
                sync(x, y, t(20)).map_err(|e| e.to_string())?;
            }
            let expected = serde_json::to_vec(&oracle_chain(receipts, 4)).unwrap();
            for n in &nodes {
                ensure!(chain_bytes(n) == expected, "shape {shape:?} heal order {perm:?}: {} differs", n.node_id);
            }
            orders += 1;
        }
    }

    let ids = node_ids(5);
    let reg = registry(&ids);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = mesh(&ids, 8);
        let mut groups = [0usize; 5];
        let mut receipts = Vec::new();
        for step in 0..80i64 {
            match rng.gen_range(0..10) {
                0 => {
                    groups = std::array::from_fn(|_| rng.gen_range(0..3));
                    set_partition(&mut nodes, &groups);
                }
                1..=5 => {
                    let k = rng.gen_range(0..5);
                    receipts.push(nodes[k].append(envelope(rng.gen_range(0..60)), &reg, t(step)).unwrap());
                }
                _ => {
                    let a = rng.gen_range(0..5);
                    let b = (a + rng.gen_range(1..5)) % 5;
                    let (x, y) = pair(&mut nodes, a, b);
                    let r = sync(x, y, t(step));
                    ensure!(r.is_ok() == (groups[a] == groups[b]), "seed {seed} step {step}: link state ignored");
                }
            }
        }
        set_partition(&mut nodes, &[0; 5]);
        let mut edges: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        loop {
            edges.shuffle(&mut rng);
            let mut changed = false;
            for &(a, b) in &edges {
                let (x, y) = pair(&mut nodes, a, b);
                let before = (x.chain_digest(), y.chain_digest());
                sync(x, y, t(1000)).map_err(|e| e.to_string())?;
                changed |= before != (x.chain_digest(), y.chain_digest());
            }
            if !changed {
                break;
            }
        }
        let expected = serde_json::to_vec(&oracle_chain(receipts, 8)).unwrap();
        for n in &nodes {
            ensure!(chain_bytes(n) == expected, "seed {seed}: {} differs from the sorted multiset", n.node_id);
        }
    }
    Ok(format!("{orders} three-node partition/heal orderings and 100 five-node schedules converged byte-identically"))
}

// 6, 7: trust fusion.

fn random_opinion(rng: &mut ChaCha8Rng) -> Opinion {
    let u = rng.gen_range(0.01..1.0);
    let b = rng.gen_range(0.0..1.0) * (1.0 - u);
    Opinion::new(b, 1.0 - u - b, u, rng.gen_range(0.05..0.95)).unwrap()
}

fn report(source: &str, opinion: Opinion, n: u64) -> Report {
    Report {
        source_id: source.into(),
        hypothesis_id: "h".into(),
        opinion,
        cost: 1.0,
        ledger_digest: Digest::of(&n.to_be_bytes()),
    }
}

fn close(a: &Opinion, b: &Opinion, tol: f64) -> bool {
    (a.belief - b.belief).abs() <= tol
        && (a.disbelief - b.disbelief).abs() <= tol
        && (a.uncertainty - b.uncertainty).abs() <= tol
        && (a.base_rate - b.base_rate).abs() <= tol
}

fn c6_collusion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let profiles = Profiles::new();
    let mut checks = 0;
    for i in 0..1000 {
        let x = random_opinion(&mut rng);
        let single = fuse_hypothesis(&[report("s00", x, 0)], &profiles, &DiversityModel::singletons(["s00"])).unwrap();
        let mut last_u = single.uncertainty;
        for n in [2usize, 5, 20] {
            let ids: Vec<String> = (0..n).map(|k| format!("s{k:02}")).collect();
            let reports: Vec<Report> = ids.iter().enumerate().map(|(k, id)| report(id, x, k as u64)).collect();
            let colluding = DiversityModel { clusters: vec![ids.clone()], similarity_threshold: 0.9 };
            let fused = fuse_hypothesis(&reports, &profiles, &colluding).unwrap();
            ensure!(close(&fused, &single, 1e-9), "opinion {i}, n={n}: {fused:?} != {single:?}");
            let independent =
                fuse_hypothesis(&reports, &profiles, &DiversityModel::singletons(ids.iter().map(String::as_str)))
                    .unwrap();
            ensure!(independent.uncertainty < last_u, "opinion {i}, n={n}: u did not decrease");
            last_u = independent.uncertainty;
            checks += 1;
        }
    }
    Ok(format!("{checks} cases: same-cluster copies equal one report within 1e-9, distinct clusters strictly lower u"))
}

fn c7_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = 1e-9;
    let valid = |o: &Opinion| {
        [o.belief, o.disbelief, o.uncertainty, o.base_rate].iter().all(|v| (-tol..=1.0 + tol).contains(v))
            && (o.belief + o.disbelief + o.uncertainty - 1.0).abs() <= tol
    };
    for i in 0..10_000 {
        let x = random_opinion(&mut rng);
        let y = Opinion { base_rate: x.base_rate, ..random_opinion(&mut rng) };
        let trust = rng.gen_range(0.0..=1.0);
        let outs = [
            x.discount(trust).unwrap(),
            x.fuse_cumulative(&y).unwrap(),
            x.fuse_averaging(&y).unwrap(),
            fuse_cumulative_all(&[x, y], x.base_rate).unwrap(),
            fuse_averaging_all(&[x, y]).unwrap(),
        ];
        ensure!(outs.iter().all(valid), "case {i}: closure violated: {outs:?}");
        ensure!(close(&x.discount(1.0).unwrap(), &x, tol), "case {i}: discount(1) is not the identity");
        let v = x.discount(0.0).unwrap();
        ensure!((v.uncertainty - 1.0).abs() <= tol && v.belief.abs() <= tol, "case {i}: discount(0) is not vacuous");
        ensure!(
            close(&x.fuse_cumulative(&Opinion::vacuous(x.base_rate)).unwrap(), &x, tol),
            "case {i}: vacuous is not the identity"
        );
        let (xy, yx) = (x.fuse_cumulative(&y).unwrap(), y.fuse_cumulative(&x).unwrap());
        ensure!(close(&xy, &yx, tol), "case {i}: cumulative fusion not commutative");
        let (xy, yx) = (x.fuse_averaging(&y).unwrap(), y.fuse_averaging(&x).unwrap());
        ensure!(close(&xy, &yx, tol), "case {i}: averaging fusion not commutative");
    }
    Ok("closure, discount identity/vacuous limits, cumulative identity, commutativity: 10000 cases each within 1e-9"
        .into())
}

// 8-10: bundled cases.

fn c8_routes() -> Outcome {
    let sc = bundled("case2_routes").map_err(|e| e.to_string())?;
    let out = run(&sc, None).map_err(|e| e.to_string())?;
    ensure!(out.passed(), "scenario assertions failed");
    let assessment = out.route_queries.get("resupply").ok_or("no resupply query")?;
    ensure!(assessment.chosen == "B", "chose {}", assessment.chosen);
    let picture = &out.pictures[out.report_node().unwrap()];
    let threats: Vec<(f64, f64, [f64; 2])> = picture
        .of_kind(TrackKind::Threat)
        .map(|t| (t.severity.unwrap_or(0.0), t.opinion.expected(), t.position()))
        .collect();
    ensure!(!threats.is_empty(), "no threats in the picture");
    let mut worst: f64 = 0.0;
    let mut best = ("", f64::INFINITY);
    for route in &sc.routes {
        let engine = assessment.risk_of(&route.route_id).ok_or("route missing from assessment")?;
        let oracle = oracle_risk(route, &threats, sc.settings.lambda_km);
        worst = worst.max((engine - oracle).abs());
        if oracle < best.1 {
            best = (&route.route_id, oracle);
        }
    }
    ensure!(worst <= 1e-9, "engine and oracle differ by {worst:e}");
    ensure!(best.0 == "B", "oracle prefers {}", best.0);
    let scores: Vec<String> = assessment.routes.iter().map(|r| format!("{}={:.4}", r.route_id, r.risk)).collect();
    Ok(format!("chose B ({}); oracle agrees within {worst:.1e}", scores.join(", ")))
}

fn c9_misinfo() -> Outcome {
    let out = run(&bundled("case3_misinfo").map_err(|e| e.to_string())?, None).map_err(|e| e.to_string())?;
    ensure!(out.passed(), "scenario assertions failed");
    let node = out.node("icrc-geneva").ok_or("no icrc-geneva node")?;
    let mut found = Vec::new();
    for (label, code) in [("tank-feed", ConflictCode::C1), ("hospital-feed", ConflictCode::C3)] {
        let p = out.percepts.get(label).ok_or(format!("no percept {label}"))?;
        ensure!(p.check.codes().contains(&code), "{label}: expected {code:?}, got {:?}", p.check.codes());
        let evidence = p.evidence.ok_or(format!("{label}: no evidence entry"))?;
        let trail = audit_trail(node.ledger.chain(), &evidence, &node.keyring).map_err(|e| e.to_string())?;
        ensure!(trail.iter().any(|e| e.event == AuditEventKind::Receipt), "{label}: evidence not receipted");
        let env = node.ledger.entries().find(|e| e.envelope.digest == evidence).unwrap();
        let m = open(&env.envelope, &node.keyring).map_err(|e| e.to_string())?;
        ensure!(m.category == MessageCategory::FreeText, "{label}: evidence is {:?}", m.category);
        found.push(format!("{label} {code:?} evidence {}", evidence.short()));
    }
    Ok(found.join("; "))
}

fn c10_traceability() -> Outcome {
    let sc = bundled("case1_mapping").map_err(|e| e.to_string())?;
    let out = run(&sc, None).map_err(|e| e.to_string())?;
    ensure!(out.passed(), "scenario assertions failed");
    let model = cluster_sources(out.profiles.iter(), sc.settings.similarity_threshold).map_err(|e| e.to_string())?;
    let (mut tracks, mut digests) = (0, 0);
    for node in &out.nodes {
        let dir = tempfile::tempdir().unwrap();
        save_chain_dir(dir.path(), node.ledger.chain()).unwrap();
        let raw = load_chain_dir(dir.path()).map_err(|e| e.to_string())?;
        ensure!(verify_chain_signed(&raw, &out.registry).is_ok(), "{}: stored chain does not verify", node.spec.id);
        let rebuilt = build_picture(&raw, &node.keyring, &out.profiles, &model, &sc.settings.picture)
            .map_err(|e| e.to_string())?;
        let engine = &out.pictures[&node.spec.id];
        ensure!(
            serde_json::to_vec(&rebuilt).unwrap() == serde_json::to_vec(engine).unwrap(),
            "{}: rebuilt picture differs",
            node.spec.id
        );
        for track in &engine.tracks {
            for d in &track.contributing {
                let trail = audit_trail(&raw, d, &node.keyring).map_err(|e| format!("{}: {e}", track.track_id))?;
                ensure!(
                    trail.iter().any(|e| e.event == AuditEventKind::Receipt),
                    "{}: {} not receipted",
                    track.track_id,
                    d.short()
                );
                digests += 1;
            }
            tracks += 1;
        }
    }
    Ok(format!(
        "{} nodes rebuilt byte-identically; {tracks} tracks, {digests} contributing digests all resolve",
        out.nodes.len()
    ))
}

// 11: anonymisation.

fn c11_anonymisation() -> Outcome {
    let m = WfMessage::new("civ-7", MessageCategory::StatusSignal, 2, t(1234)).at(15.35, 44.2, 100);
    let g = m.geometry.unwrap();
    let pseudonyms = Pseudonymizer::new("acceptance");
    let draw = |seed: u64| -> Vec<WfMessage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..10_000).map(|_| anonymize(&m, 1.0, &pseudonyms, &mut rng).unwrap()).collect()
    };
    let a = draw(11);
    ensure!(a == draw(11), "same seed gave different draws");
    ensure!(a != draw(12), "different seeds gave identical draws");
    let n = a.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for x in &a {
        let h = x.geometry.unwrap();
        sx += (h.latitude() - g.latitude()).abs() * KM_PER_DEG;
        sy += (h.longitude() - g.longitude()).abs() * KM_PER_DEG * g.latitude().to_radians().cos();
        ensure!(x.originator_id != m.originator_id, "originator not pseudonymised");
    }
    // E|X| = 1/epsilon km for Laplace(0, 1/epsilon) on each axis.
    let (mx, my) = (sx / n, sy / n);
    ensure!(
        (mx - 1.0).abs() <= 0.1 && (my - 1.0).abs() <= 0.1,
        "mean displacement {mx:.4} / {my:.4} km, analytic 1 km"
    );
    Ok(format!(
        "mean |displacement| {mx:.4} km (lat), {my:.4} km (lon) vs analytic 1.0000 km; seeded draws reproducible"
    ))
}
