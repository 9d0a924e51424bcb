//! Persistent line protocol: one JSON [`Request`] per line in, one
//! [`Reply`] per line out. The first line must be `hello`. After
//! `subscribe` the connection only carries deltas.

use std::sync::Arc;

use bigboard_core::command::Role;
use bigboard_core::ids::ClientId;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, BufWriter};
use tokio::net::{TcpListener, TcpStream};

use crate::board::{Access, Board};
use crate::protocol::{encode_line, ErrorClass, Reply, Request, WireError};

pub async fn serve(listener: TcpListener, board: Arc<Board>) {
    loop {
        match listener.accept().await {
            Ok((socket, peer)) => {
                let board = Arc::clone(&board);
                tokio::spawn(async move {
                    if let Err(e) = connection(socket, board).await {
                        tracing::debug!("stream client {peer}: {e}");
                    }
                });
            }
            Err(e) => tracing::warn!("stream accept: {e}"),
        }
    }
}

fn error_line(class: ErrorClass, message: impl Into<String>) -> String {
    encode_line(&Reply::Error {
        error: WireError::new(class, message),
    })
}

async fn connection(socket: TcpStream, board: Arc<Board>) -> std::io::Result<()> {
    socket.set_nodelay(true)?;
    let (read, write) = socket.into_split();
    let mut lines = BufReader::new(read).lines();
    let mut out = BufWriter::new(write);
    let mut access: Option<Access> = None;

    while let Some(line) = lines.next_line().await? {
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<Request>(&line) {
            Err(e) => error_line(ErrorClass::Malformed, format!("request: {e}")),
            Ok(Request::Hello { token }) => match board.authenticate(&token) {
                Some(a) => {
                    access = Some(a);
                    let (role, client_id) = match a {
                        Access::Manager => (
                            Role::Manager,
                            Some(ClientId::from(board.settings().manager_client_id.as_str())),
                        ),
                        Access::Member => (Role::Member, None),
                    };
                    encode_line(&Reply::Welcome {
                        client_id,
                        role,
                        seq: board.seq(),
                    })
                }
                None => {
                    out.write_all(error_line(ErrorClass::Unauthenticated, "unknown token").as_bytes()).await?;
                    out.flush().await?;
                    return Ok(());
                }
            },
            Ok(_) if access.is_none() => {
                out.write_all(error_line(ErrorClass::Unauthenticated, "send hello first").as_bytes()).await?;
                out.flush().await?;
                return Ok(());
            }
            Ok(Request::Health) => encode_line(&Reply::Health { health: board.health() }),
            Ok(Request::Checkout) => {
                let b = Arc::clone(&board);
                let snapshot = tokio::task::spawn_blocking(move || b.checkout()).await.expect("checkout task");
                encode_line(&Reply::Snapshot { snapshot })
            }
            Ok(Request::Submit { command }) => {
                let b = Arc::clone(&board);
                let who = access.expect("checked above");
                match tokio::task::spawn_blocking(move || b.submit(who, command)).await.expect("submit task") {
                    Ok(outcome) => encode_line(&Reply::Outcome { outcome }),
                    Err(error) => encode_line(&Reply::Error { error }),
                }
            }
            Ok(Request::Subscribe { from }) => {
                return feed(&board, from, out).await;
            }
        };
        out.write_all(reply.as_bytes()).await?;
        // keep pipelined requests batched; flush once the input runs dry
        if lines.get_ref().buffer().is_empty() {
            out.flush().await?;
        }
    }
    out.flush().await
}

async fn feed(
    board: &Arc<Board>,
    from: u64,
    mut out: BufWriter<tokio::net::tcp::OwnedWriteHalf>,
) -> std::io::Result<()> {
    let mut sub = match board.subscribe(from) {
        Ok(s) => s,
        Err(error) => {
            out.write_all(encode_line(&Reply::Error { error }).as_bytes()).await?;
            return out.flush().await;
        }
    };
    while let Some(item) = sub.next().await {
        match item {
            Ok(item) => {
                out.write_all(b"{\"reply\":\"delta\",\"delta\":").await?;
                out.write_all(item.line.as_bytes()).await?;
                out.write_all(b"}\n").await?;
            }
            Err(error) => {
                out.write_all(encode_line(&Reply::Error { error }).as_bytes()).await?;
                return out.flush().await;
            }
        }
        // flush per delta so a slow trickle is never held back
        out.flush().await?;
    }
    out.flush().await
}
