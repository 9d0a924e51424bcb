//! Alert lifecycle, ticket binding, per-sub-zone aggregation and mission
//! impact classification.
//!
//! The engine is a single-writer state machine. Every mutating call either
//! succeeds completely or returns an error without touching state.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{AlertId, AssetId, MissionId, PipeId, SubZoneId, TicketId};
use crate::pipes::PipeRegistry;
use crate::topology::Topology;

/// Alert ids with this prefix are reserved for pipe lifecycle alerts.
pub const PIPE_ALERT_PREFIX: &str = "pipe-";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlertError {
    #[error("unknown subject {0}")]
    UnknownSubject(String),
    #[error("pipe subjects are reserved for flow reports: {0}")]
    PipeSubjectReserved(PipeId),
    #[error("duplicate alert id {0}")]
    DuplicateAlert(AlertId),
    #[error("alert id {0} uses the reserved pipe prefix")]
    ReservedAlertId(AlertId),
    #[error("unknown alert {0}")]
    UnknownAlert(AlertId),
    #[error("illegal transition for {alert}: {from:?} -> {to:?}")]
    IllegalTransition {
        alert: AlertId,
        from: AlertStatus,
        to: AlertStatus,
    },
    #[error("no ticket bound to alert {0}")]
    NoTicket(AlertId),
    #[error("duplicate ticket id {0}")]
    DuplicateTicket(TicketId),
    #[error("timestamp {at} precedes last change {last} of alert {alert}")]
    TimestampRegression { alert: AlertId, at: u64, last: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlertCategory {
    Health,
    Security,
    Performance,
}

impl AlertCategory {
    pub const ALL: [AlertCategory; 3] = [Self::Health, Self::Security, Self::Performance];

    pub fn badge_icon(self) -> BadgeIcon {
        match self {
            Self::Health => BadgeIcon::Heart,
            Self::Security => BadgeIcon::Shield,
            Self::Performance => BadgeIcon::Speedometer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Health => "health",
            Self::Security => "security",
            Self::Performance => "performance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BadgeIcon {
    Heart,
    Shield,
    Speedometer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlertStatus {
    Unassigned,
    Tasked,
    Resolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusColor {
    Red,
    Yellow,
}

impl AlertStatus {
    /// Board color; resolved alerts are off-board.
    pub fn color(self) -> Option<StatusColor> {
        match self {
            Self::Unassigned => Some(StatusColor::Red),
            Self::Tasked => Some(StatusColor::Yellow),
            Self::Resolved => None,
        }
    }

    pub fn can_become(self, next: AlertStatus) -> bool {
        matches!(
            (self, next),
            (Self::Unassigned, Self::Tasked)
                | (Self::Tasked, Self::Resolved)
                | (Self::Unassigned, Self::Resolved)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertSubject {
    Asset(AssetId),
    SubZone(SubZoneId),
    Pipe(PipeId),
}

impl std::fmt::Display for AlertSubject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Asset(a) => write!(f, "asset:{a}"),
            Self::SubZone(s) => write!(f, "sub_zone:{s}"),
            Self::Pipe(p) => write!(f, "pipe:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub id: AlertId,
    pub category: AlertCategory,
    pub status: AlertStatus,
    pub subject: AlertSubject,
    pub summary: String,
    pub raised_at: u64,
    pub status_changed_at: u64,
    pub ticket_id: Option<TicketId>,
    pub primary_mission: Option<MissionId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TicketState {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TicketNote {
    pub at: u64,
    pub author: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ticket {
    pub id: TicketId,
    pub alert_id: AlertId,
    pub assignee: String,
    pub notes: Vec<TicketNote>,
    pub state: TicketState,
}

/// Red/yellow counts shown in a sub-zone's oval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateBadge {
    pub sub_zone_id: SubZoneId,
    pub red_count: u32,
    pub yellow_count: u32,
}

/// One entry of the append-only history journal: the alert as it stood
/// right after a transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub at: u64,
    pub alert: Alert,
    pub ticket: Option<Ticket>,
}

/// Asset set touched by an alert subject. Pipe subjects cover both
/// endpoint sub-zones.
pub fn affected_assets(
    subject: &AlertSubject,
    topology: &Topology,
    pipes: &PipeRegistry,
) -> Result<BTreeSet<AssetId>, AlertError> {
    let unknown = || AlertError::UnknownSubject(subject.to_string());
    match subject {
        AlertSubject::Asset(a) if topology.contains_asset(a) => Ok(BTreeSet::from([a.clone()])),
        AlertSubject::SubZone(s) => topology.sub_zone_assets(s).cloned().ok_or_else(unknown),
        AlertSubject::Pipe(p) => {
            let pipe = pipes.get(p).ok_or_else(unknown)?;
            let mut out = BTreeSet::new();
            for end in [&pipe.endpoint_a, &pipe.endpoint_b] {
                out.extend(topology.sub_zone_assets(end).ok_or_else(unknown)?.iter().cloned());
            }
            Ok(out)
        }
        AlertSubject::Asset(_) => Err(unknown()),
    }
}

/// Sub-zone whose oval counts this alert; `None` for pipe subjects.
pub fn home_sub_zone<'t>(subject: &AlertSubject, topology: &'t Topology) -> Option<&'t SubZoneId> {
    match subject {
        AlertSubject::Asset(a) => topology.sub_zone_of_asset(a),
        AlertSubject::SubZone(s) => topology.sub_zone(s).map(|s| &s.id),
        AlertSubject::Pipe(_) => None,
    }
}

/// Mission whose dependency set shares the most assets with the alert's
/// affected set; ties go to the lowest mission rank.
pub fn classify_mission_impact(
    subject: &AlertSubject,
    topology: &Topology,
    pipes: &PipeRegistry,
) -> Result<Option<MissionId>, AlertError> {
    let affected = affected_assets(subject, topology, pipes)?;
    Ok(topology
        .missions()
        .iter()
        .map(|m| {
            let overlap = if affected.len() <= m.dependency_asset_ids.len() {
                affected.iter().filter(|a| m.dependency_asset_ids.contains(*a)).count()
            } else {
                m.dependency_asset_ids.iter().filter(|a| affected.contains(*a)).count()
            };
            (overlap, m)
        })
        .filter(|(overlap, _)| *overlap > 0)
        .max_by(|(oa, ma), (ob, mb)| oa.cmp(ob).then(mb.rank.cmp(&ma.rank)))
        .map(|(_, m)| m.id.clone()))
}

/// Per-sub-zone red/yellow counts over the live alerts, in panel order.
/// Pipe alerts render as pipes and are excluded.
pub fn aggregate_badges<'a>(
    live: impl IntoIterator<Item = &'a Alert>,
    topology: &Topology,
) -> Vec<AggregateBadge> {
    let mut counts: BTreeMap<((i32, i32), &SubZoneId), (u32, u32)> = BTreeMap::new();
    for alert in live {
        let Some(sz) = home_sub_zone(&alert.subject, topology) else {
            continue;
        };
        let key = (topology.layout_key(sz).unwrap_or_default(), sz);
        let entry = counts.entry(key).or_default();
        match alert.status {
            AlertStatus::Unassigned => entry.0 += 1,
            AlertStatus::Tasked => entry.1 += 1,
            AlertStatus::Resolved => {}
        }
    }
    counts
        .into_iter()
        .filter(|(_, (r, y))| r + y > 0)
        .map(|((_, sz), (red_count, yellow_count))| AggregateBadge {
            sub_zone_id: sz.clone(),
            red_count,
            yellow_count,
        })
        .collect()
}

/// Live alerts plus their tickets and the full transition history.
#[derive(Debug, Clone, Default)]
pub struct AlertEngine {
    live: BTreeMap<AlertId, Alert>,
    tickets: BTreeMap<AlertId, Ticket>,
    retired: HashSet<AlertId>,
    ticket_ids: HashSet<TicketId>,
    history: Vec<HistoryEntry>,
}

impl AlertEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds an engine from live state (as carried by a snapshot).
    /// History starts empty.
    pub fn from_live(alerts: Vec<Alert>, tickets: Vec<Ticket>) -> Self {
        let ticket_ids = tickets.iter().map(|t| t.id.clone()).collect();
        Self {
            live: alerts.into_iter().map(|a| (a.id.clone(), a)).collect(),
            tickets: tickets.into_iter().map(|t| (t.alert_id.clone(), t)).collect(),
            retired: HashSet::new(),
            ticket_ids,
            history: Vec::new(),
        }
    }

    pub fn live(&self) -> impl Iterator<Item = &Alert> + Clone {
        self.live.values()
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn get(&self, id: &AlertId) -> Option<&Alert> {
        self.live.get(id)
    }

    pub fn tickets(&self) -> impl Iterator<Item = &Ticket> {
        self.tickets.values()
    }

    pub fn ticket_for(&self, alert: &AlertId) -> Option<&Ticket> {
        self.tickets.get(alert)
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn is_known(&self, id: &AlertId) -> bool {
        self.live.contains_key(id) || self.retired.contains(id)
    }

    fn record(&mut self, at: u64, id: &AlertId) {
        let alert = self.live.get(id).cloned().expect("recorded alert is live");
        let ticket = self.tickets.get(id).cloned();
        self.history.push(HistoryEntry { at, alert, ticket });
    }

    /// Adds a new Unassigned alert. Pipe subjects are only accepted through
    /// [`AlertEngine::raise_pipe_alert`].
    pub fn raise(
        &mut self,
        id: AlertId,
        category: AlertCategory,
        subject: AlertSubject,
        summary: String,
        at: u64,
        topology: &Topology,
        pipes: &PipeRegistry,
    ) -> Result<&Alert, AlertError> {
        if id.as_str().starts_with(PIPE_ALERT_PREFIX) {
            return Err(AlertError::ReservedAlertId(id));
        }
        if let AlertSubject::Pipe(p) = &subject {
            return Err(AlertError::PipeSubjectReserved(p.clone()));
        }
        self.insert(id, category, subject, summary, at, topology, pipes)
    }

    /// Adds the lifecycle alert of a freshly opened pipe.
    pub(crate) fn raise_pipe_alert(
        &mut self,
        pipe: &PipeId,
        summary: String,
        at: u64,
        topology: &Topology,
        pipes: &PipeRegistry,
    ) -> Result<&Alert, AlertError> {
        let id = AlertId::new(pipe.as_str());
        self.insert(
            id,
            AlertCategory::Performance,
            AlertSubject::Pipe(pipe.clone()),
            summary,
            at,
            topology,
            pipes,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn insert(
        &mut self,
        id: AlertId,
        category: AlertCategory,
        subject: AlertSubject,
        summary: String,
        at: u64,
        topology: &Topology,
        pipes: &PipeRegistry,
    ) -> Result<&Alert, AlertError> {
        if self.is_known(&id) {
            return Err(AlertError::DuplicateAlert(id));
        }
        let primary_mission = classify_mission_impact(&subject, topology, pipes)?;
        let alert = Alert {
            id: id.clone(),
            category,
            status: AlertStatus::Unassigned,
            subject,
            summary,
            raised_at: at,
            status_changed_at: at,
            ticket_id: None,
            primary_mission,
        };
        self.live.insert(id.clone(), alert);
        self.record(at, &id);
        Ok(&self.live[&id])
    }

    fn check_transition(
        &self,
        id: &AlertId,
        to: AlertStatus,
        at: u64,
    ) -> Result<&Alert, AlertError> {
        let Some(alert) = self.live.get(id) else {
            return Err(if self.retired.contains(id) {
                AlertError::IllegalTransition {
                    alert: id.clone(),
                    from: AlertStatus::Resolved,
                    to,
                }
            } else {
                AlertError::UnknownAlert(id.clone())
            });
        };
        if !alert.status.can_become(to) {
            return Err(AlertError::IllegalTransition {
                alert: id.clone(),
                from: alert.status,
                to,
            });
        }
        if at < alert.status_changed_at {
            return Err(AlertError::TimestampRegression {
                alert: id.clone(),
                at,
                last: alert.status_changed_at,
            });
        }
        Ok(alert)
    }

    /// Unassigned -> Tasked, binding a new open ticket.
    pub fn task(
        &mut self,
        id: &AlertId,
        ticket_id: TicketId,
        assignee: String,
        at: u64,
    ) -> Result<&Alert, AlertError> {
        self.check_transition(id, AlertStatus::Tasked, at)?;
        if self.ticket_ids.contains(&ticket_id) {
            return Err(AlertError::DuplicateTicket(ticket_id));
        }
        self.ticket_ids.insert(ticket_id.clone());
        self.tickets.insert(
            id.clone(),
            Ticket {
                id: ticket_id.clone(),
                alert_id: id.clone(),
                assignee,
                notes: Vec::new(),
                state: TicketState::Open,
            },
        );
        let alert = self.live.get_mut(id).expect("checked");
        alert.status = AlertStatus::Tasked;
        alert.status_changed_at = at;
        alert.ticket_id = Some(ticket_id);
        self.record(at, id);
        Ok(&self.live[id])
    }

    /// Unassigned|Tasked -> Resolved. The alert leaves the live set and its
    /// ticket, if any, is closed.
    pub fn resolve(&mut self, id: &AlertId, at: u64) -> Result<Alert, AlertError> {
        self.check_transition(id, AlertStatus::Resolved, at)?;
        let mut alert = self.live.remove(id).expect("checked");
        alert.status = AlertStatus::Resolved;
        alert.status_changed_at = at;
        let ticket = self.tickets.remove(id).map(|mut t| {
            t.state = TicketState::Closed;
            t
        });
        self.retired.insert(id.clone());
        self.history.push(HistoryEntry {
            at,
            alert: alert.clone(),
            ticket,
        });
        Ok(alert)
    }

    /// Appends a note to the ticket bound to a live alert.
    pub fn add_note(
        &mut self,
        id: &AlertId,
        author: String,
        text: String,
        at: u64,
    ) -> Result<&Ticket, AlertError> {
        if !self.live.contains_key(id) {
            return Err(AlertError::UnknownAlert(id.clone()));
        }
        let ticket = self
            .tickets
            .get_mut(id)
            .ok_or_else(|| AlertError::NoTicket(id.clone()))?;
        ticket.notes.push(TicketNote { at, author, text });
        Ok(ticket)
    }
}
