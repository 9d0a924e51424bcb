//! Async client for the line protocol. The two halves are independent so
//! a caller can pipeline submissions while another task reads replies.

use std::net::SocketAddr;

use thiserror::Error;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, BufWriter, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;

use crate::protocol::{encode_line, Reply, Request, WireError};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("connection: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad reply line: {0}")]
    Decode(#[from] serde_json::Error),
    #[error(transparent)]
    Server(#[from] WireError),
    #[error("connection closed")]
    Closed,
    #[error("unexpected reply: {0:?}")]
    Unexpected(Box<Reply>),
}

pub struct LineSender {
    out: BufWriter<OwnedWriteHalf>,
}

pub struct LineReceiver {
    lines: Lines<BufReader<OwnedReadHalf>>,
}

/// Connects and authenticates; returns the welcome reply too.
pub async fn connect(addr: SocketAddr, token: &str) -> Result<(LineSender, LineReceiver, Reply), ClientError> {
    let socket = TcpStream::connect(addr).await?;
    socket.set_nodelay(true)?;
    let (read, write) = socket.into_split();
    let mut tx = LineSender {
        out: BufWriter::new(write),
    };
    let mut rx = LineReceiver {
        lines: BufReader::new(read).lines(),
    };
    tx.send(&Request::Hello { token: token.into() }).await?;
    tx.flush().await?;
    match rx.next().await? {
        Some(Reply::Error { error }) => Err(error.into()),
        Some(welcome @ Reply::Welcome { .. }) => Ok((tx, rx, welcome)),
        Some(other) => Err(ClientError::Unexpected(Box::new(other))),
        None => Err(ClientError::Closed),
    }
}

impl LineSender {
    /// Buffers one request; call [`flush`](Self::flush) to push it out.
    pub async fn send(&mut self, request: &Request) -> Result<(), ClientError> {
        self.out.write_all(encode_line(request).as_bytes()).await?;
        Ok(())
    }

    pub async fn flush(&mut self) -> Result<(), ClientError> {
        self.out.flush().await?;
        Ok(())
    }
}

impl LineReceiver {
    /// Next reply, `None` at end of stream.
    pub async fn next(&mut self) -> Result<Option<Reply>, ClientError> {
        loop {
            match self.lines.next_line().await? {
                None => return Ok(None),
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(Some(serde_json::from_str(&l)?)),
            }
        }
    }

    /// Next raw line, for callers that want the exact bytes.
    pub async fn next_line(&mut self) -> Result<Option<String>, ClientError> {
        Ok(self.lines.next_line().await?)
    }
}
