use super::{Scenario, ScenarioError};

/// Names of the scenarios shipped with the crate.
pub const BUNDLED: [&str; 4] = ["case1_mapping", "case2_routes", "case3_misinfo", "surrender_beacon"];

const SCENARIOS: [(&str, &str); 4] = [
    ("case1_mapping", include_str!("../../../../scenarios/case1_mapping.json")),
    ("case2_routes", include_str!("../../../../scenarios/case2_routes.json")),
    ("case3_misinfo", include_str!("../../../../scenarios/case3_misinfo.json")),
    ("surrender_beacon", include_str!("../../../../scenarios/surrender_beacon.json")),
];

const STREAMS: [(&str, &str); 5] = [
    (
        "../fixtures/detections/tent_red_cross.jsonl",
        include_str!("../../../../fixtures/detections/tent_red_cross.jsonl"),
    ),
    (
        "../fixtures/detections/tank_red_cross.jsonl",
        include_str!("../../../../fixtures/detections/tank_red_cross.jsonl"),
    ),
    (
        "../fixtures/detections/spoofed_hospital.jsonl",
        include_str!("../../../../fixtures/detections/spoofed_hospital.jsonl"),
    ),
    ("../fixtures/detections/white_flag.jsonl", include_str!("../../../../fixtures/detections/white_flag.jsonl")),
    (
        "../fixtures/detections/surrender_transition.jsonl",
        include_str!("../../../../fixtures/detections/surrender_transition.jsonl"),
    ),
];

/// A bundled scenario with its detection streams inlined.
pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    let (_, text) = SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::Invalid(format!("no bundled scenario `{name}`")))?;
    let mut scenario = Scenario::from_json(text)?;
    scenario.resolve_streams(|path| {
        STREAMS
            .iter()
            .find(|(p, _)| *p == path)
            .map(|(_, t)| (*t).to_owned())
            .ok_or_else(|| ScenarioError::Io { path: path.to_owned(), reason: "not a bundled stream".into() })
    })?;
    Ok(scenario)
}
