//! Local-first pathway service: a directory of session files behind a
//! loopback HTTP API.

pub mod atomic;
mod config;
mod http;
pub mod store;

use std::sync::Arc;

pub use config::{ConfigError, StoreConfig, DEFAULT_BIND, DEFAULT_PORT};
pub use http::{router, ApiError};
pub use store::{PathwaySummary, QuarantineReport, Store, StoreError, StoredPathway};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot bind: {0}")]
    Bind(std::io::Error),
    #[error("server error: {0}")]
    Server(std::io::Error),
}

/// Opens the store and serves until `shutdown` resolves.
pub async fn serve_until<F>(cfg: StoreConfig, shutdown: F) -> Result<(), ServeError>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    cfg.check_exposure()?;
    let bind = cfg.bind_address;
    let store = Store::open(cfg)?;
    for q in store.quarantined() {
        tracing::warn!(file = %q.file.display(), reason = %q.reason, "skipped unreadable session");
    }
    tracing::info!(pathways = store.len(), %bind, "serving");
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(ServeError::Bind)?;
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServeError::Server)
}

/// [`serve_until`] Ctrl-C.
pub async fn serve(cfg: StoreConfig) -> Result<(), ServeError> {
    serve_until(cfg, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
