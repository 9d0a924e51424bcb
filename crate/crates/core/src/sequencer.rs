//! The authoritative board: a single sequencer that validates, applies and
//! journals commands in arrival order and hands out versioned deltas.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::{Command, Role};
use crate::ids::{ClientId, CommandId};
use crate::journal::{
    JournalError, JournalRecord, JournalSink, RecordStatus, RejectClass, Rejection,
};
use crate::state::{BoardState, StateDigest, StateSnapshot};
use crate::topology::Topology;

/// Deltas kept in memory for catch-up subscriptions.
pub const DEFAULT_RETENTION: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub seq: u64,
    pub command: Command,
    pub digest: StateDigest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Accepted { delta: Delta },
    Rejected { reason: Rejection },
}

impl Outcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Self::Accepted { .. })
    }

    pub fn delta(&self) -> Option<&Delta> {
        match self {
            Self::Accepted { delta } => Some(delta),
            Self::Rejected { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq: u64,
    pub digest: StateDigest,
    pub state: StateSnapshot,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubscribeError {
    #[error("from_seq {from} is ahead of current version {current}")]
    Future { from: u64, current: u64 },
    #[error("from_seq {from} predates retained history (oldest {oldest}); re-checkout required")]
    Expired { from: u64, oldest: u64 },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("journal diverges at record {index}: {message}")]
    Divergence { index: usize, message: String },
}

pub struct Sequencer {
    state: BoardState,
    seq: u64,
    outcomes: HashMap<(ClientId, CommandId), Outcome>,
    backlog: VecDeque<Delta>,
    retention: usize,
    journal: Option<Box<dyn JournalSink>>,
    /// Set when a journal append fails: memory is then ahead of disk and
    /// nothing more may be acknowledged.
    poisoned: bool,
}

impl std::fmt::Debug for Sequencer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sequencer")
            .field("seq", &self.seq)
            .field("live_alerts", &self.state.alerts().live_count())
            .finish_non_exhaustive()
    }
}

fn authorize(command: &Command) -> Result<(), Rejection> {
    let kind = command.kind();
    if kind.is_view_control() && command.issuer.role != Role::Manager {
        return Err(Rejection {
            class: RejectClass::Authorization,
            message: format!(
                "{} is not the manager and may not issue {kind:?}",
                command.issuer.client_id
            ),
        });
    }
    Ok(())
}

impl Sequencer {
    pub fn new(topology: Arc<Topology>) -> Self {
        Self {
            state: BoardState::new(topology),
            seq: 0,
            outcomes: HashMap::new(),
            backlog: VecDeque::new(),
            retention: DEFAULT_RETENTION,
            journal: None,
            poisoned: false,
        }
    }

    pub fn with_retention(mut self, retention: usize) -> Self {
        self.retention = retention.max(1);
        while self.backlog.len() > self.retention {
            self.backlog.pop_front();
        }
        self
    }

    pub fn with_journal(mut self, journal: Box<dyn JournalSink>) -> Self {
        self.journal = Some(journal);
        self
    }

    /// Rebuilds a sequencer by re-running every journaled command, checking
    /// that each record reproduces its recorded outcome and digest.
    pub fn recover(
        topology: Arc<Topology>,
        records: &[JournalRecord],
    ) -> Result<Self, ReplayError> {
        let mut seq = Self::new(topology);
        for (index, record) in records.iter().enumerate() {
            let outcome = seq.sequence(record.command.clone());
            let diverged = |message: String| ReplayError::Divergence { index, message };
            match (&outcome, record.status) {
                (Outcome::Accepted { delta }, RecordStatus::Accepted) => {
                    if delta.seq != record.seq {
                        return Err(diverged(format!("seq {} != recorded {}", delta.seq, record.seq)));
                    }
                    if let Some(d) = &record.digest {
                        if d != &delta.digest {
                            return Err(diverged("digest mismatch".into()));
                        }
                    }
                }
                (Outcome::Rejected { .. }, RecordStatus::Rejected) => {}
                _ => {
                    return Err(diverged(format!(
                        "outcome {:?} differs from recorded {:?}",
                        outcome.is_accepted(),
                        record.status
                    )))
                }
            }
        }
        Ok(seq)
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn state(&self) -> &BoardState {
        &self.state
    }

    pub fn digest(&self) -> StateDigest {
        self.state.digest()
    }

    pub fn checkout(&self) -> Snapshot {
        Snapshot {
            seq: self.seq,
            digest: self.state.digest(),
            state: self.state.snapshot(),
        }
    }

    /// Validates, applies and journals one command. A repeated
    /// `(issuer, command_id)` returns the original outcome untouched.
    ///
    /// Errors only when the journal cannot be written; the command is then
    /// not acknowledged.
    pub fn submit(&mut self, command: Command) -> Result<Outcome, JournalError> {
        if self.poisoned {
            return Err(JournalError::Poisoned);
        }
        let key = (command.issuer.client_id.clone(), command.command_id.clone());
        if let Some(prev) = self.outcomes.get(&key) {
            return Ok(prev.clone());
        }
        let outcome = self.sequence(command.clone());
        if let Some(journal) = self.journal.as_mut() {
            let (status, digest, reason) = match &outcome {
                Outcome::Accepted { delta } => {
                    (RecordStatus::Accepted, Some(delta.digest.clone()), None)
                }
                Outcome::Rejected { reason } => (RecordStatus::Rejected, None, Some(reason.clone())),
            };
            let appended = journal.append(&JournalRecord {
                seq: self.seq,
                command,
                status,
                digest,
                reason,
            });
            if let Err(e) = appended {
                self.poisoned = true;
                return Err(e);
            }
        }
        Ok(outcome)
    }

    fn sequence(&mut self, command: Command) -> Outcome {
        let key = (command.issuer.client_id.clone(), command.command_id.clone());
        if let Some(prev) = self.outcomes.get(&key) {
            return prev.clone();
        }
        let result = authorize(&command).and_then(|()| {
            self.state
                .apply(&command.body, command.issuer.client_id.as_str(), command.at)
                .map_err(|e| Rejection {
                    class: RejectClass::Validation,
                    message: e.to_string(),
                })
        });
        let outcome = match result {
            Ok(_) => {
                self.seq += 1;
                let delta = Delta {
                    seq: self.seq,
                    command,
                    digest: self.state.digest(),
                };
                if self.backlog.len() == self.retention {
                    self.backlog.pop_front();
                }
                self.backlog.push_back(delta.clone());
                Outcome::Accepted { delta }
            }
            Err(reason) => Outcome::Rejected { reason },
        };
        self.outcomes.insert(key, outcome.clone());
        outcome
    }

    /// Retained deltas with seq > `from`, in order.
    pub fn deltas_since(&self, from: u64) -> Result<Vec<Delta>, SubscribeError> {
        if from > self.seq {
            return Err(SubscribeError::Future {
                from,
                current: self.seq,
            });
        }
        let oldest = self.backlog.front().map_or(self.seq + 1, |d| d.seq);
        if from + 1 < oldest {
            return Err(SubscribeError::Expired { from, oldest });
        }
        let skip = (from + 1 - oldest) as usize;
        Ok(self.backlog.iter().skip(skip).cloned().collect())
    }
}

/// Recovers the state digest a journal leads to.
pub fn journal_replay(
    topology: Arc<Topology>,
    records: &[JournalRecord],
) -> Result<StateDigest, ReplayError> {
    Ok(Sequencer::recover(topology, records)?.digest())
}
