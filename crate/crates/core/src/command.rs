//! Command records exchanged between clients, the sequencer and the
//! journal. One JSON object per line with the keys `command_id`, `issuer`,
//! `kind`, `payload` and `at`.

use serde::{Deserialize, Serialize};

use crate::alert::{AlertCategory, AlertSubject};
use crate::ids::{AlertId, ClientId, CommandId, MissionId, QueryId, SubZoneId, TicketId};
use crate::query::QueryExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Manager,
    Member,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClientIdentity {
    pub client_id: ClientId,
    pub role: Role,
}

impl ClientIdentity {
    pub fn manager(id: impl Into<ClientId>) -> Self {
        Self {
            client_id: id.into(),
            role: Role::Manager,
        }
    }

    pub fn member(id: impl Into<ClientId>) -> Self {
        Self {
            client_id: id.into(),
            role: Role::Member,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum CommandBody {
    RaiseAlert {
        alert_id: AlertId,
        category: AlertCategory,
        subject: AlertSubject,
        summary: String,
    },
    TaskAlert {
        alert_id: AlertId,
        ticket_id: TicketId,
        assignee: String,
    },
    ResolveAlert {
        alert_id: AlertId,
    },
    ReportFlow {
        endpoint_a: SubZoneId,
        endpoint_b: SubZoneId,
        available_fraction: f64,
        current_fraction: f64,
    },
    ActivateMission {
        mission_id: MissionId,
    },
    DeactivateMission {
        mission_id: MissionId,
    },
    SaveQuery {
        query_id: QueryId,
        label: String,
        expression: QueryExpr,
        color: String,
    },
    ActivateQuery {
        query_id: QueryId,
    },
    DeactivateQuery {
        query_id: QueryId,
    },
    AddTicketNote {
        alert_id: AlertId,
        text: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommandKind {
    RaiseAlert,
    TaskAlert,
    ResolveAlert,
    ReportFlow,
    ActivateMission,
    DeactivateMission,
    SaveQuery,
    ActivateQuery,
    DeactivateQuery,
    AddTicketNote,
}

impl CommandKind {
    pub const ALL: [CommandKind; 10] = [
        Self::RaiseAlert,
        Self::TaskAlert,
        Self::ResolveAlert,
        Self::ReportFlow,
        Self::ActivateMission,
        Self::DeactivateMission,
        Self::SaveQuery,
        Self::ActivateQuery,
        Self::DeactivateQuery,
        Self::AddTicketNote,
    ];

    /// Kinds that change what the board shows; manager only.
    pub fn is_view_control(self) -> bool {
        matches!(
            self,
            Self::ActivateMission
                | Self::DeactivateMission
                | Self::SaveQuery
                | Self::ActivateQuery
                | Self::DeactivateQuery
        )
    }
}

impl CommandBody {
    pub fn kind(&self) -> CommandKind {
        match self {
            Self::RaiseAlert { .. } => CommandKind::RaiseAlert,
            Self::TaskAlert { .. } => CommandKind::TaskAlert,
            Self::ResolveAlert { .. } => CommandKind::ResolveAlert,
            Self::ReportFlow { .. } => CommandKind::ReportFlow,
            Self::ActivateMission { .. } => CommandKind::ActivateMission,
            Self::DeactivateMission { .. } => CommandKind::DeactivateMission,
            Self::SaveQuery { .. } => CommandKind::SaveQuery,
            Self::ActivateQuery { .. } => CommandKind::ActivateQuery,
            Self::DeactivateQuery { .. } => CommandKind::DeactivateQuery,
            Self::AddTicketNote { .. } => CommandKind::AddTicketNote,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub command_id: CommandId,
    pub issuer: ClientIdentity,
    #[serde(flatten)]
    pub body: CommandBody,
    /// Event-source timestamp, ms since epoch.
    pub at: u64,
}

impl Command {
    pub fn new(
        command_id: impl Into<CommandId>,
        issuer: ClientIdentity,
        at: u64,
        body: CommandBody,
    ) -> Self {
        Self {
            command_id: command_id.into(),
            issuer,
            body,
            at,
        }
    }

    pub fn kind(&self) -> CommandKind {
        self.body.kind()
    }

    /// Single-line canonical encoding (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("command serializes")
    }
}
