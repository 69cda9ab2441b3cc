//! HTTP service for the interactive editor.
//!
//! Projects live in a storage directory as canonical project files. Every
//! accepted mutation bumps the project's revision; `PUT /projects/{id}`
//! must name the revision it was based on and gets `409` when it is stale.

mod api;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::Router;
use tower_http::services::ServeDir;

pub use api::ApiError;
pub use store::{Entry, Store, StoreError};

/// The API routes, plus static files from `ui_dir` for every other path.
pub fn app(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let router = api::routes(store);
    match ui_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

pub struct ServeOptions {
    pub addr: SocketAddr,
    pub storage: PathBuf,
    pub ui_dir: Option<PathBuf>,
}

/// Binds and serves until the process is stopped.
pub async fn serve(options: ServeOptions) -> Result<(), ServeError> {
    let store = Arc::new(Store::open(&options.storage)?);
    let listener = tokio::net::TcpListener::bind(options.addr).await?;
    tracing::info!(
        "listening on http://{} with storage {}",
        listener.local_addr()?,
        store.dir().display()
    );
    axum::serve(listener, app(store, options.ui_dir)).await?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot open storage: {0}")]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
