//! Protective perception over recorded detections, cross-checked against the picture.
//!
//! cargo run -p pause-core --example gate

use chrono::{TimeZone, Utc};
use pause_core::gate::*;
use pause_core::picture::Picture;
use pause_core::scenario::default_model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/detections");
    let config = GateConfig::default();
    let empty = Picture::default();
    for name in ["tent_red_cross", "white_flag", "surrender_transition", "tank_red_cross", "spoofed_hospital"] {
        let detections = parse_detection_stream(&std::fs::read_to_string(format!("{dir}/{name}.jsonl"))?)?;
        let (state, kept) = perceive_stream(default_model(), detections, &config);
        let rules: Vec<String> = state.rationale.iter().filter_map(|f| f.rule).map(|r| format!("{r:?}")).collect();
        let check = cross_check(&state, &kept, &empty, [15.35, 44.2], &config);
        println!("{name:<22} {:?} via {rules:?}; cross-check {:?}", state.assessment, check.codes());
        if let Some(m) =
            evidence_message("observer", &check, [15.35, 44.2], Utc.with_ymd_and_hms(2026, 3, 1, 10, 0, 0).unwrap())
        {
            println!("{:<22} evidence: {}", "", m.payload_text.unwrap());
        }
    }

    let mut untrusted = default_model();
    untrusted.weights_origin = WeightsOrigin::Unverified;
    let (state, _) = perceive_stream(untrusted, Vec::new(), &config);
    println!("unverified model: {:?} ({})", state.assessment, state.rationale[0].detail);

    println!();
    for (truth, op, machine, _, _) in ENGAGEMENT_TABLE {
        let m = PerceptionState { perceiver: Perceiver::Machine, assessment: machine, rationale: Vec::new() };
        let c = resolve_engagement(truth, &PerceptionState::operator(op, ""), &m);
        println!("{truth:?}/{op:?}/{machine:?}: {} - {} (engaged: {})", c.state, c.consequence, c.engaged);
    }
    Ok(())
}
