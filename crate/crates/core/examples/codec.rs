//! Encode, seal, verify and resolve humanitarian messages.
//!
//! cargo run -p pause-core --example codec

use chrono::{TimeZone, Utc};
use pause_core::codec::*;
use pause_core::crypto::{GroupKey, KeyRegistry, Keypair, Keyring};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t0 = Utc.with_ymd_and_hms(2026, 3, 1, 8, 0, 0).unwrap();
    let hospital = WfMessage::new("icrc-geneva", MessageCategory::ProtectiveSign, 1, t0).at(15.35472, 44.20667, 250);

    let bytes = encode(&hospital)?;
    println!("canonical: {}", String::from_utf8_lossy(&bytes).replace('\u{1f}', "|"));
    println!("digest:    {}", hospital.digest()?);
    assert_eq!(decode(&bytes)?, hospital);

    let key = Keypair::derive("source:icrc-geneva");
    let mut registry = KeyRegistry::new();
    registry.register("icrc-geneva", key.public());
    let envelope = seal(&hospital, &key, None)?;
    println!("verify:    {:?}", verify(&envelope, &registry));

    let medical = GroupKey::derive("medical", "pre-shared secret");
    let private = seal(&hospital, &key, Some(&medical))?;
    println!("member:    {:?}", open(&private, &Keyring::new().with(medical)).map(|m| m.subject().unwrap().name));
    println!("outsider:  {:?}", open(&private, &Keyring::new()).unwrap_err());

    let h = hospital.digest()?;
    let moved = WfMessage::new("icrc-geneva", MessageCategory::ProtectiveSign, 1, t0 + chrono::Duration::minutes(30))
        .at(15.36, 44.21, 250)
        .referencing(RefIndicator::Update, h);
    let beacon = WfMessage::new("unit-7", MessageCategory::EmergencySignal, 3, t0).at(15.2, 44.1, 30);
    let duress = WfMessage::new("unit-7", MessageCategory::EmergencySignal, 3, t0 + chrono::Duration::minutes(5))
        .referencing(RefIndicator::Duress, beacon.digest()?);
    let report = resolve_references(&[hospital, moved, beacon, duress])?;
    for (digest, state) in &report.states {
        println!("{}  {state:?}", digest.short());
    }
    Ok(())
}
