//! Civilian relay reports: pseudonymous originator, hour timestamps, Laplace location noise.
//!
//! cargo run -p pause-core --example anonymize -- 0.5

use chrono::{TimeZone, Utc};
use pause_core::codec::{MessageCategory, WfMessage};
use pause_core::picture::{anonymize, geo::distance_km, Pseudonymizer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epsilon: f64 = std::env::args().nth(1).map_or(Ok(1.0), |a| a.parse())?;
    let report = WfMessage::new(
        "phone-+967-555-0101",
        MessageCategory::StatusSignal,
        2,
        Utc.with_ymd_and_hms(2026, 3, 1, 9, 41, 7).unwrap(),
    )
    .at(15.35, 44.2, 20);
    let pseudonyms = Pseudonymizer::new("civ-relay");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = report.geometry.unwrap();
    let mut total = 0.0;
    let n = 1000;
    for i in 0..n {
        let a = anonymize(&report, epsilon, &pseudonyms, &mut rng)?;
        let h = a.geometry.unwrap();
        let d = distance_km([g.latitude(), g.longitude()], [h.latitude(), h.longitude()]);
        total += d;
        if i < 3 {
            println!(
                "{} at {} ({:.5}, {:.5}), moved {d:.3} km",
                a.originator_id,
                a.timestamp,
                h.latitude(),
                h.longitude()
            );
        }
    }
    println!("epsilon {epsilon}: mean displacement over {n} draws {:.3} km", total / n as f64);
    Ok(())
}
