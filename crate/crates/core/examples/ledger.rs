//! Two ledger nodes partitioned, written to independently, healed and tampered with.
//!
//! cargo run -p pause-core --example ledger

use chrono::{Duration, TimeZone, Utc};
use pause_core::codec::{seal, MessageCategory, WfMessage};
use pause_core::crypto::{KeyRegistry, Keypair};
use pause_core::ledger::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t0 = Utc.with_ymd_and_hms(2026, 3, 1, 8, 0, 0).unwrap();
    let mut registry = KeyRegistry::new();
    for id in ["ngo", "hq", "field"] {
        registry.register(id, Keypair::derive(id).public());
    }
    let mut hq = LedgerNode::with_block_size("hq", Keypair::derive("hq"), 2);
    let mut field = LedgerNode::with_block_size("field", Keypair::derive("field"), 2);
    hq.add_peer("field", LinkState::Down);
    field.add_peer("hq", LinkState::Down);

    let sign = |i: i64| {
        let m = WfMessage::new("ngo", MessageCategory::StatusSignal, 2, t0 + Duration::seconds(i)).at(
            15.0 + i as f64 * 0.01,
            44.0,
            50,
        );
        seal(&m, &Keypair::derive("ngo"), None).unwrap()
    };
    for i in 0..3 {
        hq.append(sign(i), &registry, t0 + Duration::seconds(60))?;
    }
    for i in 3..5 {
        field.append(sign(i), &registry, t0 + Duration::seconds(60))?;
    }
    println!("partitioned: sync -> {:?}", sync(&mut hq, &mut field, t0).unwrap_err());

    hq.set_link("field", LinkState::Up);
    field.set_link("hq", LinkState::Up);
    let outcome = sync(&mut hq, &mut field, t0 + Duration::seconds(120))?;
    println!(
        "healed: {} -> {} entries, identical = {}",
        outcome.entries_before,
        outcome.entries_after,
        hq.chain() == field.chain()
    );
    for b in hq.chain() {
        println!("  block {} {} ({} entries)", b.height, b.block_hash.short(), b.entries.len());
    }

    let mut forged = hq.chain().to_vec();
    forged[1].entries[0].envelope.canonical_bytes[4] ^= 1;
    println!("tampered: {:?}", verify_chain(&forged));

    let dir = std::env::temp_dir().join("pause-ledger-example");
    save_chain_dir(&dir, hq.chain())?;
    println!("saved to {}: {:?}", dir.display(), verify_chain_dir(&dir)?);
    Ok(())
}
