//! Inter-sub-zone bandwidth problems ("pipes") along the bottom of the board.
//!
//! Each live pipe owns one performance alert whose id equals the pipe id;
//! the pipe lives exactly as long as that alert does.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alert::{AlertEngine, AlertError, StatusColor};
use crate::ids::{AlertId, MissionId, PipeId, SubZoneId};
use crate::topology::Topology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipeError {
    #[error("unknown sub-zone {0}")]
    UnknownSubZone(SubZoneId),
    #[error("pipe endpoints must differ ({0})")]
    IdenticalEndpoints(SubZoneId),
    #[error("{field} {value} outside [0, 1]")]
    FractionOutOfRange { field: &'static str, value: f64 },
    #[error(transparent)]
    Alert(#[from] AlertError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: PipeId,
    /// Creation order; breaks `opened_at` ties.
    pub seq: u64,
    pub endpoint_a: SubZoneId,
    pub endpoint_b: SubZoneId,
    /// Outer band: share of nominal capacity still available.
    pub available_fraction: f64,
    /// Inner band: live utilization.
    pub current_fraction: f64,
    pub alert_id: AlertId,
    pub opened_at: u64,
    pub updated_at: u64,
}

impl Pipe {
    pub fn connects(&self, sub_zone: &SubZoneId) -> bool {
        &self.endpoint_a == sub_zone || &self.endpoint_b == sub_zone
    }
}

fn pair_key(a: &SubZoneId, b: &SubZoneId) -> (SubZoneId, SubZoneId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipeRegistry {
    live: BTreeMap<PipeId, Pipe>,
    by_pair: BTreeMap<(SubZoneId, SubZoneId), PipeId>,
    next_seq: u64,
}

impl PipeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a registry from snapshot state.
    pub fn from_live(pipes: Vec<Pipe>, next_seq: u64) -> Self {
        let by_pair = pipes
            .iter()
            .map(|p| (pair_key(&p.endpoint_a, &p.endpoint_b), p.id.clone()))
            .collect();
        Self {
            live: pipes.into_iter().map(|p| (p.id.clone(), p)).collect(),
            by_pair,
            next_seq,
        }
    }

    pub fn get(&self, id: &PipeId) -> Option<&Pipe> {
        self.live.get(id)
    }

    pub fn live(&self) -> impl Iterator<Item = &Pipe> + Clone {
        self.live.values()
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn for_pair(&self, a: &SubZoneId, b: &SubZoneId) -> Option<&Pipe> {
        self.by_pair.get(&pair_key(a, b)).and_then(|id| self.live.get(id))
    }

    /// Drops a pipe once its alert is resolved.
    pub(crate) fn close(&mut self, id: &PipeId) -> Option<Pipe> {
        let pipe = self.live.remove(id)?;
        self.by_pair.remove(&pair_key(&pipe.endpoint_a, &pipe.endpoint_b));
        Some(pipe)
    }
}

fn check_fraction(field: &'static str, value: f64) -> Result<(), PipeError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(PipeError::FractionOutOfRange { field, value })
    }
}

/// Whether a flow report opened a new pipe or refreshed an existing one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowOutcome {
    Opened(PipeId),
    Updated(PipeId),
}

impl FlowOutcome {
    pub fn pipe_id(&self) -> &PipeId {
        match self {
            Self::Opened(id) | Self::Updated(id) => id,
        }
    }
}

/// Opens a pipe plus its Unassigned performance alert, or updates the
/// bands of the live pipe for the same unordered endpoint pair.
#[allow(clippy::too_many_arguments)]
pub fn report_flow(
    pipes: &mut PipeRegistry,
    alerts: &mut AlertEngine,
    topology: &Topology,
    endpoint_a: &SubZoneId,
    endpoint_b: &SubZoneId,
    available_fraction: f64,
    current_fraction: f64,
    at: u64,
) -> Result<FlowOutcome, PipeError> {
    for end in [endpoint_a, endpoint_b] {
        if !topology.contains_sub_zone(end) {
            return Err(PipeError::UnknownSubZone(end.clone()));
        }
    }
    if endpoint_a == endpoint_b {
        return Err(PipeError::IdenticalEndpoints(endpoint_a.clone()));
    }
    check_fraction("available_fraction", available_fraction)?;
    check_fraction("current_fraction", current_fraction)?;

    let key = pair_key(endpoint_a, endpoint_b);
    if let Some(id) = pipes.by_pair.get(&key) {
        let pipe = pipes.live.get_mut(id).expect("pair index in sync");
        pipe.available_fraction = available_fraction;
        pipe.current_fraction = current_fraction;
        pipe.updated_at = pipe.updated_at.max(at);
        return Ok(FlowOutcome::Updated(id.clone()));
    }

    let seq = pipes.next_seq + 1;
    let id = PipeId::new(format!("{}{seq}", crate::alert::PIPE_ALERT_PREFIX));
    let pipe = Pipe {
        id: id.clone(),
        seq,
        endpoint_a: endpoint_a.clone(),
        endpoint_b: endpoint_b.clone(),
        available_fraction,
        current_fraction,
        alert_id: AlertId::new(id.as_str()),
        opened_at: at,
        updated_at: at,
    };
    pipes.live.insert(id.clone(), pipe);
    pipes.by_pair.insert(key, id.clone());
    let summary = format!("bandwidth degraded between {endpoint_a} and {endpoint_b}");
    if let Err(e) = alerts.raise_pipe_alert(&id, summary, at, topology, pipes) {
        pipes.close(&id);
        return Err(e.into());
    }
    pipes.next_seq = seq;
    Ok(FlowOutcome::Opened(id))
}

/// Red while the pipe's alert is unassigned, yellow once tasked.
pub fn pipe_color(pipe: &Pipe, alerts: &AlertEngine) -> Option<StatusColor> {
    alerts.get(&pipe.alert_id).and_then(|a| a.status.color())
}

/// Sub-zones holding at least one dependency asset of any listed mission.
pub fn mission_sub_zones<'a>(
    topology: &Topology,
    missions: impl IntoIterator<Item = &'a MissionId>,
) -> BTreeSet<SubZoneId> {
    let mut out = BTreeSet::new();
    for m in missions {
        if let Ok(deps) = topology.mission_dependency_set(m) {
            out.extend(topology.subzones_touching(deps).unwrap_or_default());
        }
    }
    out
}

/// Live pipes in opening order; with missions active, only pipes with an
/// endpoint in a mission-relevant sub-zone.
pub fn visible_pipes<'p>(
    pipes: impl IntoIterator<Item = &'p Pipe>,
    active_missions: &[MissionId],
    topology: &Topology,
) -> Vec<&'p Pipe> {
    let mut out: Vec<&Pipe> = if active_missions.is_empty() {
        pipes.into_iter().collect()
    } else {
        let relevant = mission_sub_zones(topology, active_missions);
        pipes
            .into_iter()
            .filter(|p| relevant.contains(&p.endpoint_a) || relevant.contains(&p.endpoint_b))
            .collect()
    };
    out.sort_by_key(|p| (p.opened_at, p.seq));
    out
}
