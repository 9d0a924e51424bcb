//! Core model of the Big Board: the network topology, alert triage, flow
//! pipes, overlays and the query language, plus the sequencer, journal and
//! replica machinery that keeps every copy of the board in step.

pub mod alert;
pub mod command;
pub mod ids;
pub mod journal;
pub mod overlay;
pub mod pipes;
pub mod query;
pub mod render;
pub mod replica;
pub mod sequencer;
pub mod sim;
pub mod state;
pub mod topology;

pub use alert::{
    AggregateBadge, Alert, AlertCategory, AlertEngine, AlertError, AlertStatus, AlertSubject,
    BadgeIcon, StatusColor, Ticket,
};
pub use command::{ClientIdentity, Command, CommandBody, CommandKind, Role};
pub use ids::*;
pub use journal::{FileJournal, FsyncPolicy, JournalError, JournalRecord, RejectClass, Rejection};
pub use overlay::{BoardView, FunctionalQuery, MenuEntry, OverlayError, MAX_ACTIVE_QUERIES};
pub use pipes::{Pipe, PipeError, PipeRegistry};
pub use query::{parse_query, Atom, QueryExpr, QueryParseError};
pub use replica::{Replica, ReplicaError};
pub use sequencer::{journal_replay, Delta, Outcome, Sequencer, Snapshot, SubscribeError};
pub use state::{BoardError, BoardState, StateDigest, StateSnapshot};
pub use topology::{load_topology, Topology, TopologyError};
