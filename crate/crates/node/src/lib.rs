//! Node daemon for the pause network: message submission, picture queries,
//! what-if route analysis, trust tuning, gate percepts, a live event stream and
//! peer chain exchange over JSON and HTTP.

pub mod api;
pub mod config;
pub mod error;
pub mod peer;
pub mod session;
pub mod state;

use std::sync::Arc;
use std::time::Duration;

pub use api::router;
pub use config::NodeConfig;
pub use error::{ApiError, Problem};
pub use session::{ApiSession, Operation};
pub use state::{AppState, Node, NodeEvent};

/// Opens the node named by `config`, starts peer sync and serves until ctrl-c.
pub async fn serve(config: NodeConfig) -> anyhow::Result<()> {
    let listen = config.listen.clone();
    let interval = config.sync_interval_ms;
    let node: AppState = Arc::new(Node::open(config)?);
    if interval > 0 && !node.config().peers.is_empty() {
        tokio::spawn(peer::run_sync_loop(node.clone(), Duration::from_millis(interval)));
    }
    let listener = tokio::net::TcpListener::bind(&listen).await?;
    tracing::info!(node = node.node_id(), addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(node))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
