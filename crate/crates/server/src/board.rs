//! The shared board behind both listeners: one sequencer under a lock, a
//! broadcast fan-out of encoded deltas, and token-based identity.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use bigboard_core::command::{ClientIdentity, Command, Role};
use bigboard_core::journal::JournalError;
use bigboard_core::overlay::menu_window;
use bigboard_core::sequencer::{Delta, Outcome, Sequencer, Snapshot, SubscribeError};
use bigboard_core::topology::Topology;
use tokio::sync::broadcast;

use crate::protocol::{ErrorClass, Health, ViewReply, WireError};

/// Encoded deltas buffered per subscriber before it falls back to the
/// sequencer backlog.
const FEED_CAPACITY: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Manager,
    Member,
}

/// One delta as sent on every feed: its JSON line without the newline.
#[derive(Debug)]
pub struct FeedItem {
    pub seq: u64,
    pub line: String,
}

impl FeedItem {
    fn encode(delta: &Delta) -> Arc<Self> {
        Arc::new(Self {
            seq: delta.seq,
            line: serde_json::to_string(delta).expect("delta serializes"),
        })
    }
}

pub struct BoardSettings {
    pub manager_token: String,
    pub member_token: String,
    pub manager_client_id: String,
    pub tick_ms: u64,
    pub window_size: usize,
}

pub struct Board {
    sequencer: Mutex<Sequencer>,
    feed: broadcast::Sender<Arc<FeedItem>>,
    topology: Arc<Topology>,
    settings: BoardSettings,
    started: Instant,
}

fn subscribe_error(e: SubscribeError) -> WireError {
    match e {
        SubscribeError::Future { .. } => WireError::new(ErrorClass::Future, e.to_string()),
        SubscribeError::Expired { .. } => WireError::new(ErrorClass::Expired, e.to_string()),
    }
}

impl Board {
    pub fn new(sequencer: Sequencer, settings: BoardSettings) -> Self {
        let topology = Arc::clone(sequencer.state().topology());
        let (feed, _) = broadcast::channel(FEED_CAPACITY);
        Self {
            sequencer: Mutex::new(sequencer),
            feed,
            topology,
            settings,
            started: Instant::now(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Sequencer> {
        // a panic mid-submit cannot leave the sequencer half-applied, since
        // state changes happen after validation
        self.sequencer.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn settings(&self) -> &BoardSettings {
        &self.settings
    }

    pub fn authenticate(&self, token: &str) -> Option<Access> {
        if token == self.settings.manager_token {
            Some(Access::Manager)
        } else if token == self.settings.member_token {
            Some(Access::Member)
        } else {
            None
        }
    }

    /// The identity a session acts as. Manager tokens always act as the
    /// configured manager; member tokens keep their chosen client id but
    /// never the manager's.
    pub fn stamp(&self, access: Access, command: &mut Command) -> Result<(), WireError> {
        match access {
            Access::Manager => {
                command.issuer = ClientIdentity::manager(self.settings.manager_client_id.as_str());
            }
            Access::Member => {
                if command.issuer.client_id.as_str() == self.settings.manager_client_id {
                    return Err(WireError::new(
                        ErrorClass::Forbidden,
                        format!("client id {} is reserved for the manager", command.issuer.client_id),
                    ));
                }
                command.issuer.role = Role::Member;
            }
        }
        Ok(())
    }

    /// Blocking: holds the sequencer lock across the journal write.
    pub fn submit(&self, access: Access, mut command: Command) -> Result<Outcome, WireError> {
        self.stamp(access, &mut command)?;
        let mut seq = self.lock();
        let before = seq.seq();
        let outcome = seq.submit(command).map_err(|e| {
            tracing::error!("journal append failed: {e}");
            let message = match e {
                JournalError::Poisoned => e.to_string(),
                other => format!("{other}; board stopped acknowledging"),
            };
            WireError::new(ErrorClass::Unavailable, message)
        })?;
        // replays of old commands return their old delta and must not be
        // re-broadcast
        if let Outcome::Accepted { delta } = &outcome {
            if delta.seq > before {
                let _ = self.feed.send(FeedItem::encode(delta));
            }
        }
        Ok(outcome)
    }

    pub fn checkout(&self) -> Snapshot {
        self.lock().checkout()
    }

    pub fn seq(&self) -> u64 {
        self.lock().seq()
    }

    pub fn health(&self) -> Health {
        let seq = self.lock();
        Health {
            status: "ok".into(),
            network_name: self.topology.network_name().into(),
            seq: seq.seq(),
            digest: seq.digest(),
            tick_ms: self.settings.tick_ms,
            window_size: self.settings.window_size,
        }
    }

    /// Scroll tick from the server clock.
    pub fn current_tick(&self) -> u64 {
        self.started.elapsed().as_millis() as u64 / self.settings.tick_ms
    }

    pub fn view(&self, tick: Option<u64>) -> ViewReply {
        let tick = tick.unwrap_or_else(|| self.current_tick());
        let (seq, digest, view) = {
            let s = self.lock();
            (s.seq(), s.digest(), s.state().view())
        };
        let window = menu_window(&view.menu, self.settings.window_size, tick)
            .into_iter()
            .cloned()
            .collect();
        ViewReply {
            seq,
            digest,
            tick,
            window_size: self.settings.window_size,
            view,
            menu_window: window,
        }
    }

    /// Opens a feed of every delta after `from`. Backlog and live tail are
    /// taken under one lock, so nothing is missed or repeated.
    pub fn subscribe(self: &Arc<Self>, from: u64) -> Result<Subscription, WireError> {
        let (backlog, rx) = self.backlog_and_tail(from)?;
        Ok(Subscription {
            board: Arc::clone(self),
            backlog,
            rx,
            last: from,
        })
    }

    fn backlog_and_tail(
        &self,
        from: u64,
    ) -> Result<(VecDeque<Arc<FeedItem>>, broadcast::Receiver<Arc<FeedItem>>), WireError> {
        let seq = self.lock();
        let deltas = seq.deltas_since(from).map_err(subscribe_error)?;
        let rx = self.feed.subscribe();
        drop(seq);
        Ok((deltas.iter().map(FeedItem::encode).collect(), rx))
    }
}

pub struct Subscription {
    board: Arc<Board>,
    backlog: VecDeque<Arc<FeedItem>>,
    rx: broadcast::Receiver<Arc<FeedItem>>,
    last: u64,
}

impl Subscription {
    /// Seq of the last delta handed out.
    pub fn last(&self) -> u64 {
        self.last
    }

    /// The next delta in order. `None` once the board shuts down; an error
    /// when this subscriber fell behind retained history.
    pub async fn next(&mut self) -> Option<Result<Arc<FeedItem>, WireError>> {
        loop {
            if let Some(item) = self.backlog.pop_front() {
                if item.seq <= self.last {
                    continue;
                }
                self.last = item.seq;
                return Some(Ok(item));
            }
            match self.rx.recv().await {
                Ok(item) if item.seq <= self.last => continue,
                Ok(item) if item.seq == self.last + 1 => {
                    self.last = item.seq;
                    return Some(Ok(item));
                }
                Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => {
                    match self.board.backlog_and_tail(self.last) {
                        Ok((backlog, rx)) => {
                            self.backlog = backlog;
                            self.rx = rx;
                        }
                        Err(e) => return Some(Err(e)),
                    }
                }
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    }
}
