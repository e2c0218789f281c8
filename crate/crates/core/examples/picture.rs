//! Operational picture from a ledger, route risk and GeoJSON export.
//!
//! cargo run -p pause-core --example picture

use chrono::{Duration, TimeZone, Utc};
use pause_core::codec::{MessageCategory, SigningKeys, WfMessage};
use pause_core::crypto::{Keypair, Keyring};
use pause_core::ledger::LedgerNode;
use pause_core::picture::*;
use pause_core::trust::{DiversityModel, Profiles, SourceProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t0 = Utc.with_ymd_and_hms(2026, 3, 1, 8, 0, 0).unwrap();
    let messages = [
        ("moh", MessageCategory::ProtectiveSign, 1, 15.33, 44.20),
        ("msf", MessageCategory::ProtectiveSign, 1, 15.3305, 44.2003),
        ("scouts", MessageCategory::DangerSign, 4, 15.36, 44.16),
        ("press", MessageCategory::DangerSign, 5, 15.245, 44.2),
        ("moh", MessageCategory::InfrastructureSign, 4, 15.31, 44.25),
    ];
    let mut keys = SigningKeys::new();
    let mut node = LedgerNode::new("wfp-ops", Keypair::derive("wfp-ops"));
    for (i, (src, cat, subject, lat, lon)) in messages.iter().enumerate() {
        keys.insert(*src, Keypair::derive(src));
        let m = WfMessage::new(*src, *cat, *subject, t0 + Duration::seconds(i as i64)).at(*lat, *lon, 100);
        node.append(keys.seal(&m, None)?, &keys.registry(), t0 + Duration::minutes(5))?;
    }
    let profiles: Profiles = [("moh", 9, 1), ("msf", 8, 1), ("scouts", 6, 2), ("press", 2, 2)]
        .into_iter()
        .map(|(id, r, s)| SourceProfile::new(id, vec![]).with_evidence(r, s))
        .collect();
    let model = DiversityModel::singletons(profiles.iter().map(|p| p.source_id.as_str()));
    let picture = build_picture(node.chain(), &Keyring::new(), &profiles, &model, &PictureConfig::default())?;
    for t in &picture.tracks {
        println!(
            "{:<8} {:?} {:<24} E = {:.3} from {} message(s)",
            t.track_id,
            t.kind,
            t.label,
            t.expected,
            t.contributing.len()
        );
    }

    let routes = vec![
        RouteOption {
            route_id: "A".into(),
            polyline: vec![[15.3, 44.1], [15.36, 44.15], [15.36, 44.25], [15.3, 44.3]],
        },
        RouteOption { route_id: "B".into(), polyline: vec![[15.3, 44.1], [15.3, 44.2], [15.3, 44.3]] },
        RouteOption {
            route_id: "C".into(),
            polyline: vec![[15.3, 44.1], [15.24, 44.15], [15.24, 44.25], [15.3, 44.3]],
        },
    ];
    let assessment = assess_routes(&routes, &picture.tracks, DEFAULT_LAMBDA_KM)?;
    for r in &assessment.routes {
        println!("route {} risk {:.4}", r.route_id, r.risk);
    }
    println!("chosen: {}", assessment.chosen);

    let hospital = picture.of_kind(TrackKind::ProtectedSite).next().unwrap();
    println!("strike near hospital: {:?}", decision_support(&hospital.opinion, 1.0, 10.0, DEFAULT_U_MAX)?);
    let geojson = to_geojson(&picture, &routes, Some(&assessment));
    println!("geojson features: {}", geojson["features"].as_array().map_or(0, Vec::len));
    Ok(())
}
