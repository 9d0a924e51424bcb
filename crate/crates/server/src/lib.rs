//! The authoritative Big Board server.
//!
//! [`open_board`] loads the topology and recovers the journal;
//! [`start`] binds the HTTP listener (and optionally the line-protocol
//! listener) and returns a handle that owns both.

pub mod board;
pub mod client;
pub mod config;
pub mod http;
pub mod protocol;
pub mod stream;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use bigboard_core::journal::{FileJournal, JournalError};
use bigboard_core::sequencer::{ReplayError, Sequencer};
use bigboard_core::sim::{generate_fixture, FixtureError, BIG_ENTERPRISE_ASSETS};
use bigboard_core::topology::{load_topology, Topology, TopologyError};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub use board::{Access, Board, BoardSettings, Subscription};
pub use config::{ConfigError, ServerConfig};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read topology {path}: {source}")]
    TopologyRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("journal recovery: {0}")]
    Recovery(#[from] ReplayError),
    #[error("bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
}

pub fn load_configured_topology(config: &ServerConfig) -> Result<Topology, ServerError> {
    match &config.topology {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ServerError::TopologyRead {
                path: path.clone(),
                source,
            })?;
            Ok(load_topology(&text)?)
        }
        None => Ok(generate_fixture(BIG_ENTERPRISE_ASSETS)?),
    }
}

/// Builds the board, replaying the journal when one is configured.
pub fn open_board(config: &ServerConfig) -> Result<Board, ServerError> {
    config.validate()?;
    let topology = Arc::new(load_configured_topology(config)?);
    let sequencer = match &config.journal {
        Some(path) => {
            let (journal, records) = FileJournal::open(path, config.fsync_policy()?)?;
            let seq = Sequencer::recover(Arc::clone(&topology), &records)?;
            tracing::info!(records = records.len(), seq = seq.seq(), "journal recovered");
            seq.with_journal(Box::new(journal))
        }
        None => Sequencer::new(topology),
    }
    .with_retention(config.retention);
    Ok(Board::new(
        sequencer,
        BoardSettings {
            manager_token: config.manager_token.clone(),
            member_token: config.member_token.clone(),
            manager_client_id: config.manager_client_id.clone(),
            tick_ms: config.tick_ms,
            window_size: config.window_size,
        },
    ))
}

pub struct RunningServer {
    pub http_addr: SocketAddr,
    pub stream_addr: Option<SocketAddr>,
    pub board: Arc<Board>,
    tasks: Vec<JoinHandle<()>>,
}

impl RunningServer {
    /// Stops both listeners. Connections already open keep their tasks
    /// until the peer goes away.
    pub fn shutdown(self) {
        for t in &self.tasks {
            t.abort();
        }
    }

    /// Runs until ctrl-c.
    pub async fn until_ctrl_c(self) {
        let _ = tokio::signal::ctrl_c().await;
        self.shutdown();
    }
}

async fn bind(addr: SocketAddr) -> Result<TcpListener, ServerError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServerError::Bind { addr, source })
}

pub async fn start(config: &ServerConfig) -> Result<RunningServer, ServerError> {
    let board = Arc::new(open_board(config)?);
    start_with(board, config.listen, config.stream_listen).await
}

pub async fn start_with(
    board: Arc<Board>,
    listen: SocketAddr,
    stream_listen: Option<SocketAddr>,
) -> Result<RunningServer, ServerError> {
    let http = bind(listen).await?;
    let http_addr = http.local_addr().map_err(|source| ServerError::Bind { addr: listen, source })?;
    let app = http::router(Arc::clone(&board));
    let mut tasks = vec![tokio::spawn(async move {
        if let Err(e) = axum::serve(http, app).await {
            tracing::error!("http server: {e}");
        }
    })];
    let stream_addr = match stream_listen {
        Some(addr) => {
            let l = bind(addr).await?;
            let bound = l.local_addr().map_err(|source| ServerError::Bind { addr, source })?;
            tasks.push(tokio::spawn(stream::serve(l, Arc::clone(&board))));
            Some(bound)
        }
        None => None,
    };
    tracing::info!(%http_addr, ?stream_addr, "board serving");
    Ok(RunningServer {
        http_addr,
        stream_addr,
        board,
        tasks,
    })
}
