//! Two nodes on loopback: submit over HTTP to each, sync, and read the shared picture.
//!
//! cargo run -p pause-node --example two_nodes

use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use pause_core::codec::{MessageCategory, WfMessage};
use pause_core::crypto::{KeyRegistry, Keyring};
use pause_core::scenario::{node_keypair, source_keypair};
use pause_core::trust::SourceRegistry;
use pause_node::peer::sync_peer;
use pause_node::state::SubmitRequest;
use pause_node::{router, AppState, Node, NodeConfig};
use serde_json::Value;

fn node(dir: &std::path::Path, id: &str, peer: &str, url: &str) -> anyhow::Result<AppState> {
    let toml = format!("node_id = \"{id}\"\nrole = \"ICRC\"\nsigning_key = \"k\"\ndata_dir = \"{id}\"\n[[peers]]\nid = \"{peer}\"\nurl = \"{url}\"\n");
    let config = NodeConfig::from_toml(&toml, dir, Vec::new())?;
    let mut registry = KeyRegistry::new();
    for s in ["moh", "msf"] {
        registry.register(s, source_keypair(s).public());
    }
    let sources = SourceRegistry::from_json(r#"{"sources": [{"source_id": "moh"}, {"source_id": "msf"}]}"#)?;
    Ok(Arc::new(Node::new(config, node_keypair(id), registry, Keyring::new(), &sources)?))
}

async fn listen(state: AppState) -> anyhow::Result<String> {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let url = format!("http://{}", listener.local_addr()?);
    tokio::spawn(async move { axum::serve(listener, router(state)).await });
    Ok(url)
}

async fn post(client: &reqwest::Client, url: &str, source: &str, minutes: i64, lon: f64) -> anyhow::Result<Value> {
    let t = Utc.with_ymd_and_hms(2026, 3, 1, 8, 0, 0).unwrap() + Duration::minutes(minutes);
    let message = WfMessage::new(source, MessageCategory::ProtectiveSign, 1, t).at(15.35, lon, 100);
    let signature = Some(source_keypair(source).sign(message.digest()?.as_bytes()));
    let body = SubmitRequest { message, signature, group: None };
    let resp = client
        .post(format!("{url}/messages"))
        .header("x-pause-client", "example")
        .header("x-pause-role", "ICRC")
        .json(&body)
        .send()
        .await?;
    Ok(resp.error_for_status()?.json().await?)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let b_listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let b_url = format!("http://{}", b_listener.local_addr()?);
    let a = node(dir.path(), "geneva", "sanaa", &b_url)?;
    let b = node(dir.path(), "sanaa", "geneva", "http://127.0.0.1:9")?;
    let b_app = router(b.clone());
    tokio::spawn(async move { axum::serve(b_listener, b_app).await });
    let a_url = listen(a.clone()).await?;

    let client = reqwest::Client::new();
    println!("geneva accepted {}", post(&client, &a_url, "moh", 0, 44.2).await?["digest"]);
    println!("sanaa accepted  {}", post(&client, &b_url, "msf", 5, 44.2002).await?["digest"]);

    let outcome = sync_peer(&a, &client, &a.config().peers[0]).await?;
    println!(
        "sync: {} -> {} entries; heads equal: {}",
        outcome.entries_before,
        outcome.entries_after,
        a.chain_digest() == b.chain_digest()
    );

    let picture: Value = client
        .get(format!("{b_url}/picture"))
        .header("x-pause-client", "example")
        .header("x-pause-role", "Observer")
        .send()
        .await?
        .json()
        .await?;
    for t in picture["picture"]["tracks"].as_array().into_iter().flatten() {
        println!(
            "sanaa sees {} {} E = {:.3}",
            t["kind"].as_str().unwrap_or("?"),
            t["label"].as_str().unwrap_or("?"),
            t["expected"].as_f64().unwrap_or(0.0)
        );
    }
    Ok(())
}
