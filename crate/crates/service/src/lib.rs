//! Read-only JSON HTTP API over a sememe knowledge base.
//!
//! All endpoints are `GET` under `/api`; errors are
//! `{"error": {"kind": ..., "message": ...}}` with status 400 or 404.

pub mod api;
pub mod http;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::HeaderValue;
use axum::Router;
use thiserror::Error;
use tokio::net::TcpListener;

pub use api::{ApiError, ErrorClass, Kb, KbError};

/// Environment variable naming the default data directory.
pub const DATA_ENV: &str = "SEMEME_KB_DATA";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    pub similarity_config: Option<PathBuf>,
    pub k_default: usize,
    /// Extra origin allowed to call the API from a browser.
    pub cors_origin: Option<String>,
    /// Directory served at `/`, typically the explorer bundle.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(addr: SocketAddr, data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            addr,
            data_dir: data_dir.into(),
            similarity_config: None,
            k_default: api::K_DEFAULT,
            cors_origin: None,
            static_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("data directory {0} does not exist")]
    MissingData(PathBuf),
    #[error("static directory {0} does not exist")]
    MissingStatic(PathBuf),
    #[error("invalid CORS origin {0:?}")]
    BadOrigin(String),
    #[error(transparent)]
    Load(#[from] KbError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A loaded dataset bound to a listening socket.
pub struct Server {
    listener: TcpListener,
    app: Router,
}

impl Server {
    /// Load the dataset and bind. Fails before accepting anything if the
    /// dataset does not load.
    pub async fn bind(config: &ServiceConfig) -> Result<Self, ServeError> {
        if !config.data_dir.is_dir() {
            return Err(ServeError::MissingData(config.data_dir.clone()));
        }
        if let Some(dir) = config.static_dir.as_ref().filter(|d| !d.is_dir()) {
            return Err(ServeError::MissingStatic(dir.clone()));
        }
        let origin = config
            .cors_origin
            .as_deref()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServeError::BadOrigin(o.to_owned())))
            .transpose()?;
        let kb = Kb::open(&config.data_dir, config.similarity_config.as_deref(), config.k_default)?;
        let app = http::app(Arc::new(kb), origin.as_ref(), config.static_dir.as_deref());
        Self::with_app(config.addr, app).await
    }

    pub async fn with_app(addr: SocketAddr, app: Router) -> Result<Self, ServeError> {
        let listener = TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr, source })?;
        Ok(Server { listener, app })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serve until `shutdown` resolves, then finish in-flight requests.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
        axum::serve(self.listener, self.app).with_graceful_shutdown(shutdown).await
    }
}

/// Resolves on Ctrl-C, or SIGTERM on Unix.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}
