use serde_json::{json, Value};

use super::{Picture, RiskAssessment, RouteOption};

/// GeoJSON FeatureCollection of tracks (points) and routes (line strings).
/// GeoJSON positions are `[longitude, latitude]`.
pub fn to_geojson(picture: &Picture, routes: &[RouteOption], assessment: Option<&RiskAssessment>) -> Value {
    let mut features: Vec<Value> = picture
        .tracks
        .iter()
        .map(|t| {
            json!({
                "type": "Feature",
                "id": t.track_id,
                "geometry": {"type": "Point", "coordinates": [t.location.longitude(), t.location.latitude()]},
                "properties": {
                    "kind": t.kind,
                    "label": t.label,
                    "radius_m": t.location.radius_m,
                    "belief": t.opinion.belief,
                    "disbelief": t.opinion.disbelief,
                    "uncertainty": t.opinion.uncertainty,
                    "expected": t.expected,
                    "severity": t.severity,
                    "status": t.status,
                    "last_update": t.last_update,
                    "contributing": t.contributing.iter().map(|d| d.to_hex()).collect::<Vec<_>>(),
                }
            })
        })
        .collect();
    for r in routes {
        let risk = assessment.and_then(|a| a.risk_of(&r.route_id));
        let chosen = assessment.map(|a| a.chosen == r.route_id);
        features.push(json!({
            "type": "Feature",
            "id": format!("route-{}", r.route_id),
            "geometry": {"type": "LineString", "coordinates": r.polyline.iter().map(|p| [p[1], p[0]]).collect::<Vec<_>>()},
            "properties": {"route_id": r.route_id, "risk": risk, "chosen": chosen}
        }));
    }
    json!({"type": "FeatureCollection", "ledger_head": picture.ledger_head, "features": features})
}
