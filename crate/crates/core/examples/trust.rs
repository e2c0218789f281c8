//! Trust-weighted fusion over diverse sources, greedy source selection and feedback.
//!
//! cargo run -p pause-core --example trust

use pause_core::crypto::Digest;
use pause_core::trust::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut profiles: Profiles = [
        ("ngo-1", vec![1.0, 0.0, 0.1], 9, 1),
        ("ngo-2", vec![1.0, 0.05, 0.1], 8, 2),
        ("press-1", vec![0.0, 1.0, 0.0], 3, 1),
        ("drone-7", vec![0.1, 0.0, 1.0], 1, 4),
    ]
    .into_iter()
    .map(|(id, f, r, s)| SourceProfile::new(id, f).with_evidence(r, s))
    .collect();
    let model = cluster_sources(profiles.iter(), 0.9)?;
    println!("clusters: {:?}", model.clusters);

    let report = |id: &str, b: f64, d: f64, u: f64, n: u8| Report {
        source_id: id.into(),
        hypothesis_id: "hospital-at-15.35,44.21".into(),
        opinion: Opinion::new(b, d, u, 0.5).unwrap(),
        cost: 1.0,
        ledger_digest: Digest::of(&[n]),
    };
    let reports = [
        report("ngo-1", 0.8, 0.0, 0.2, 0),
        report("ngo-2", 0.8, 0.0, 0.2, 1),
        report("press-1", 0.6, 0.1, 0.3, 2),
        report("drone-7", 0.0, 0.9, 0.1, 3),
    ];
    let trace = fuse_hypothesis_traced(&reports, &profiles, &model)?;
    for c in &trace.clusters {
        println!("  cluster {:<8} fused E = {:.3}", c.cluster, c.fused.expected());
    }
    println!("fused: {:?} (E = {:.3})", trace.result, trace.result.expected());

    let candidates: Vec<Candidate> = profiles.iter().map(|p| Candidate { profile: p.clone(), cost: 1.0 }).collect();
    println!("selected under budget 2: {:?}", select_sources(&candidates, &model, 2.0));

    let before = profiles.trust("drone-7");
    let after = profiles.apply_feedback("drone-7", Outcome::Refuted).trust();
    println!("drone-7 trust after refutation: {before:.3} -> {after:.3}");
    Ok(())
}
