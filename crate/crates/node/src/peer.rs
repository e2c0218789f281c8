//! Background exchange of chains with configured peers over `POST /sync`.

use std::time::Duration;

use pause_core::ledger::{LinkState, SyncOutcome};

use crate::config::PeerConfig;
use crate::session::{CLIENT_HEADER, ROLE_HEADER};
use crate::state::{AppState, SyncRequest, SyncResponse};

#[derive(Debug, thiserror::Error)]
pub enum PeerError {
    #[error("peer `{peer}` unreachable: {reason}")]
    Unreachable { peer: String, reason: String },
    #[error("peer `{peer}` answered {status}: {body}")]
    Refused { peer: String, status: u16, body: String },
    #[error("peer `{peer}` response rejected: {reason}")]
    Rejected { peer: String, reason: String },
}

/// Sends this node's chain to one peer and merges the chain it answers with.
/// A failed exchange marks the link down.
pub async fn sync_peer(node: &AppState, client: &reqwest::Client, peer: &PeerConfig) -> Result<SyncOutcome, PeerError> {
    let request = SyncRequest { node_id: node.node_id().to_owned(), blocks: node.chain() };
    let url = format!("{}/sync", peer.url.trim_end_matches('/'));
    let result = async {
        let response = client
            .post(&url)
            .header(CLIENT_HEADER, node.node_id())
            .header(ROLE_HEADER, node.role().to_string())
            .json(&request)
            .send()
            .await
            .map_err(|e| PeerError::Unreachable { peer: peer.id.clone(), reason: e.to_string() })?;
        let status = response.status();
        if !status.is_success() {
            let body = response.text().await.unwrap_or_default();
            return Err(PeerError::Refused { peer: peer.id.clone(), status: status.as_u16(), body });
        }
        let answer: SyncResponse =
            response.json().await.map_err(|e| PeerError::Rejected { peer: peer.id.clone(), reason: e.to_string() })?;
        node.absorb(&peer.id, &answer.blocks)
            .map_err(|e| PeerError::Rejected { peer: peer.id.clone(), reason: format!("{}: {}", e.code, e.detail) })
    }
    .await;
    if matches!(result, Err(PeerError::Unreachable { .. })) {
        node.set_link(&peer.id, LinkState::Down);
    }
    result
}

/// Syncs with every peer each `interval` until the task is dropped.
pub async fn run_sync_loop(node: AppState, interval: Duration) {
    let client = reqwest::Client::builder().timeout(Duration::from_secs(10)).build().expect("http client");
    let mut ticker = tokio::time::interval(interval);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        for peer in node.config().peers.clone() {
            match sync_peer(&node, &client, &peer).await {
                Ok(o) if o.changed() => tracing::info!(peer = %peer.id, entries = o.entries_after, "merged peer chain"),
                Ok(_) => {}
                Err(e) => tracing::warn!("{e}"),
            }
        }
    }
}
