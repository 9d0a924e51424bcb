//! The board's complete mutable state and the deterministic command
//! application function shared by the server and every local copy.
//!
//! The state digest is SHA-256 over a canonical header: topology digest,
//! pipe counter, saved queries (sorted by id), active missions and queries,
//! and an order-independent sum of per-entry SHA-256 hashes, one entry per
//! live alert (with its ticket) and per live pipe. The entry sum is kept up
//! to date incrementally so digests stay cheap as the live set grows.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alert::{AlertEngine, AlertError, AlertSubject};
use crate::alert::{Alert, Ticket};
use crate::command::CommandBody;
use crate::ids::{AlertId, MissionId, PipeId, QueryId};
use crate::overlay::{BoardView, FunctionalQuery, MissionTabs, OverlayError, QueryBook};
use crate::pipes::{report_flow, Pipe, PipeError, PipeRegistry};
use crate::topology::Topology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoardError {
    #[error(transparent)]
    Alert(#[from] AlertError),
    #[error(transparent)]
    Pipe(#[from] PipeError),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
    #[error("snapshot topology {snapshot} does not match loaded topology {loaded}")]
    TopologyMismatch { snapshot: String, loaded: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateDigest(String);

impl StateDigest {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum EntryKey {
    Alert(AlertId),
    Pipe(PipeId),
}

/// Wrapping 256-bit sum of entry hashes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct EntrySum {
    limbs: [u64; 4],
    count: u64,
}

impl EntrySum {
    fn limbs(hash: &[u8; 32]) -> [u64; 4] {
        let mut out = [0u64; 4];
        for (i, chunk) in hash.chunks_exact(8).enumerate() {
            out[i] = u64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
        out
    }

    fn add(&mut self, hash: &[u8; 32]) {
        let mut carry = 0u64;
        for (limb, v) in self.limbs.iter_mut().zip(Self::limbs(hash)) {
            let (s1, c1) = limb.overflowing_add(v);
            let (s2, c2) = s1.overflowing_add(carry);
            *limb = s2;
            carry = u64::from(c1) + u64::from(c2);
        }
        self.count += 1;
    }

    fn sub(&mut self, hash: &[u8; 32]) {
        let mut borrow = 0u64;
        for (limb, v) in self.limbs.iter_mut().zip(Self::limbs(hash)) {
            let (d1, b1) = limb.overflowing_sub(v);
            let (d2, b2) = d1.overflowing_sub(borrow);
            *limb = d2;
            borrow = u64::from(b1) + u64::from(b2);
        }
        self.count -= 1;
    }

    fn hex(&self) -> String {
        let bytes: Vec<u8> = self.limbs.iter().flat_map(|l| l.to_le_bytes()).collect();
        hex::encode(bytes)
    }
}

fn alert_entry_hash(alert: &Alert, ticket: Option<&Ticket>) -> [u8; 32] {
    let bytes = serde_json::to_vec(&("alert", alert, ticket)).expect("alert serializes");
    Sha256::digest(bytes).into()
}

fn pipe_entry_hash(pipe: &Pipe) -> [u8; 32] {
    let bytes = serde_json::to_vec(&("pipe", pipe)).expect("pipe serializes");
    Sha256::digest(bytes).into()
}

#[derive(Serialize)]
struct DigestHeader<'a> {
    topology: &'a str,
    next_pipe_seq: u64,
    saved_queries: Vec<&'a FunctionalQuery>,
    active_missions: &'a [MissionId],
    active_queries: &'a [QueryId],
    entries: u64,
    entry_sum: String,
}

/// Topology identity carried by a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyRef {
    pub network_name: String,
    pub digest: String,
}

/// Full canonical live state, in sorted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub topology: TopologyRef,
    pub alerts: Vec<Alert>,
    pub tickets: Vec<Ticket>,
    pub pipes: Vec<Pipe>,
    pub next_pipe_seq: u64,
    pub saved_queries: Vec<FunctionalQuery>,
    pub active_missions: Vec<MissionId>,
    pub active_queries: Vec<QueryId>,
}

/// What a successfully applied command touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    Alert(AlertId),
    Pipe { pipe: PipeId, opened: bool },
    View,
}

#[derive(Debug, Clone)]
pub struct BoardState {
    topology: Arc<Topology>,
    topology_digest: String,
    alerts: AlertEngine,
    pipes: PipeRegistry,
    queries: QueryBook,
    missions: MissionTabs,
    entry_hashes: HashMap<EntryKey, [u8; 32]>,
    entry_sum: EntrySum,
}

impl BoardState {
    pub fn new(topology: Arc<Topology>) -> Self {
        let topology_digest = topology.digest();
        Self {
            topology,
            topology_digest,
            alerts: AlertEngine::new(),
            pipes: PipeRegistry::new(),
            queries: QueryBook::new(),
            missions: MissionTabs::default(),
            entry_hashes: HashMap::new(),
            entry_sum: EntrySum::default(),
        }
    }

    pub fn from_snapshot(
        topology: Arc<Topology>,
        snapshot: &StateSnapshot,
    ) -> Result<Self, BoardError> {
        let loaded = topology.digest();
        if loaded != snapshot.topology.digest {
            return Err(BoardError::TopologyMismatch {
                snapshot: snapshot.topology.digest.clone(),
                loaded,
            });
        }
        let mut state = Self {
            topology_digest: loaded,
            topology,
            alerts: AlertEngine::from_live(snapshot.alerts.clone(), snapshot.tickets.clone()),
            pipes: PipeRegistry::from_live(snapshot.pipes.clone(), snapshot.next_pipe_seq),
            queries: QueryBook::from_parts(
                snapshot.saved_queries.clone(),
                snapshot.active_queries.clone(),
            ),
            missions: MissionTabs::from_active(snapshot.active_missions.clone()),
            entry_hashes: HashMap::new(),
            entry_sum: EntrySum::default(),
        };
        let ids: Vec<AlertId> = state.alerts.live().map(|a| a.id.clone()).collect();
        for id in ids {
            state.refresh(EntryKey::Alert(id));
        }
        let ids: Vec<PipeId> = state.pipes.live().map(|p| p.id.clone()).collect();
        for id in ids {
            state.refresh(EntryKey::Pipe(id));
        }
        Ok(state)
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn alerts(&self) -> &AlertEngine {
        &self.alerts
    }

    pub fn pipes(&self) -> &PipeRegistry {
        &self.pipes
    }

    pub fn queries(&self) -> &QueryBook {
        &self.queries
    }

    pub fn missions(&self) -> &MissionTabs {
        &self.missions
    }

    /// Current derived layers.
    pub fn view(&self) -> BoardView {
        BoardView::derive(&self.topology, &self.alerts, &self.pipes, &self.queries, &self.missions)
    }

    fn entry_hash(&self, key: &EntryKey) -> Option<[u8; 32]> {
        match key {
            EntryKey::Alert(id) => self
                .alerts
                .get(id)
                .map(|a| alert_entry_hash(a, self.alerts.ticket_for(id))),
            EntryKey::Pipe(id) => self.pipes.get(id).map(pipe_entry_hash),
        }
    }

    fn refresh(&mut self, key: EntryKey) {
        let new = self.entry_hash(&key);
        let old = match new {
            Some(h) => self.entry_hashes.insert(key, h),
            None => self.entry_hashes.remove(&key),
        };
        if let Some(old) = old {
            self.entry_sum.sub(&old);
        }
        if let Some(new) = new {
            self.entry_sum.add(&new);
        }
    }

    /// Applies one command body. On error nothing changes.
    pub fn apply(
        &mut self,
        body: &CommandBody,
        author: &str,
        at: u64,
    ) -> Result<Applied, BoardError> {
        let topology = Arc::clone(&self.topology);
        let applied = match body {
            CommandBody::RaiseAlert {
                alert_id,
                category,
                subject,
                summary,
            } => {
                self.alerts.raise(
                    alert_id.clone(),
                    *category,
                    subject.clone(),
                    summary.clone(),
                    at,
                    &topology,
                    &self.pipes,
                )?;
                Applied::Alert(alert_id.clone())
            }
            CommandBody::TaskAlert {
                alert_id,
                ticket_id,
                assignee,
            } => {
                self.alerts
                    .task(alert_id, ticket_id.clone(), assignee.clone(), at)?;
                Applied::Alert(alert_id.clone())
            }
            CommandBody::ResolveAlert { alert_id } => {
                let resolved = self.alerts.resolve(alert_id, at)?;
                if let AlertSubject::Pipe(pipe) = &resolved.subject {
                    self.pipes.close(pipe);
                    self.refresh(EntryKey::Pipe(pipe.clone()));
                }
                Applied::Alert(alert_id.clone())
            }
            CommandBody::ReportFlow {
                endpoint_a,
                endpoint_b,
                available_fraction,
                current_fraction,
            } => {
                let outcome = report_flow(
                    &mut self.pipes,
                    &mut self.alerts,
                    &topology,
                    endpoint_a,
                    endpoint_b,
                    *available_fraction,
                    *current_fraction,
                    at,
                )?;
                let pipe = outcome.pipe_id().clone();
                let opened = matches!(outcome, crate::pipes::FlowOutcome::Opened(_));
                if opened {
                    self.refresh(EntryKey::Alert(AlertId::new(pipe.as_str())));
                }
                Applied::Pipe { pipe, opened }
            }
            CommandBody::ActivateMission { mission_id } => {
                self.missions.activate(mission_id, &topology)?;
                Applied::View
            }
            CommandBody::DeactivateMission { mission_id } => {
                self.missions.deactivate(mission_id, &topology)?;
                Applied::View
            }
            CommandBody::SaveQuery {
                query_id,
                label,
                expression,
                color,
            } => {
                self.queries.save(
                    FunctionalQuery {
                        id: query_id.clone(),
                        label: label.clone(),
                        expression: expression.clone(),
                        color: color.clone(),
                        active: false,
                    },
                    &topology,
                )?;
                Applied::View
            }
            CommandBody::ActivateQuery { query_id } => {
                self.queries.activate(query_id)?;
                Applied::View
            }
            CommandBody::DeactivateQuery { query_id } => {
                self.queries.deactivate(query_id)?;
                Applied::View
            }
            CommandBody::AddTicketNote { alert_id, text } => {
                self.alerts
                    .add_note(alert_id, author.to_owned(), text.clone(), at)?;
                Applied::Alert(alert_id.clone())
            }
        };
        match &applied {
            Applied::Alert(id) => self.refresh(EntryKey::Alert(id.clone())),
            Applied::Pipe { pipe, .. } => self.refresh(EntryKey::Pipe(pipe.clone())),
            Applied::View => {}
        }
        Ok(applied)
    }

    fn header_digest(&self, entry_sum: &EntrySum) -> StateDigest {
        let header = DigestHeader {
            topology: &self.topology_digest,
            next_pipe_seq: self.pipes.next_seq(),
            saved_queries: self.queries.saved().collect(),
            active_missions: self.missions.active(),
            active_queries: self.queries.active(),
            entries: entry_sum.count,
            entry_sum: entry_sum.hex(),
        };
        let bytes = serde_json::to_vec(&header).expect("header serializes");
        StateDigest(hex::encode(Sha256::digest(bytes)))
    }

    /// Digest of the live state, using the incrementally maintained entry sum.
    pub fn digest(&self) -> StateDigest {
        self.header_digest(&self.entry_sum)
    }

    /// Digest recomputed from scratch; always equals [`BoardState::digest`].
    pub fn recompute_digest(&self) -> StateDigest {
        let mut sum = EntrySum::default();
        for alert in self.alerts.live() {
            sum.add(&alert_entry_hash(alert, self.alerts.ticket_for(&alert.id)));
        }
        for pipe in self.pipes.live() {
            sum.add(&pipe_entry_hash(pipe));
        }
        self.header_digest(&sum)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            topology: TopologyRef {
                network_name: self.topology.network_name().to_owned(),
                digest: self.topology_digest.clone(),
            },
            alerts: self.alerts.live().cloned().collect(),
            tickets: self.alerts.tickets().cloned().collect(),
            pipes: self.pipes.live().cloned().collect(),
            next_pipe_seq: self.pipes.next_seq(),
            saved_queries: self.queries.saved().cloned().collect(),
            active_missions: self.missions.active().to_vec(),
            active_queries: self.queries.active().to_vec(),
        }
    }
}
