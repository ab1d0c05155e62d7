//! Network and command-line front end for the `oli-core` engine.
//!
//! The server keeps sessions in memory and exposes them over HTTP, with one
//! WebSocket push channel per session that carries every new revision.

pub mod api;
pub mod commands;
pub mod registry;
pub mod schema;

use std::future::Future;

use tokio::net::TcpListener;

pub use api::{router, AppState, ServerConfig};

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    config: ServerConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(AppState::new(config));
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}
