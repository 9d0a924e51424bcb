//! Everything the board draws on top of raw state: mission highlights and
//! red strips, functional-query overlays, individual badges, the warning
//! menu and its scroll window.
//!
//! All layer computations are pure functions of the board state and the
//! view controls.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alert::{
    aggregate_badges, AggregateBadge, Alert, AlertCategory, AlertEngine, AlertStatus, AlertSubject,
    StatusColor,
};
use crate::ids::{AlertId, AssetId, MissionId, PipeId, QueryId, SubZoneId};
use crate::pipes::{mission_sub_zones, visible_pipes, PipeRegistry};
use crate::query::{evaluate_query, QueryExpr};
use crate::topology::Topology;

/// Maximum number of simultaneously active functional queries.
pub const MAX_ACTIVE_QUERIES: usize = 8;

/// Capsule color used when an alert impacts no mission.
pub const NEUTRAL_COLOR: &str = "neutral";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OverlayError {
    #[error("unknown mission {0}")]
    UnknownMission(MissionId),
    #[error("mission {0} already active")]
    MissionAlreadyActive(MissionId),
    #[error("mission {0} not active")]
    MissionNotActive(MissionId),
    #[error("unknown query {0}")]
    UnknownQuery(QueryId),
    #[error("query {0} already saved")]
    DuplicateQuery(QueryId),
    #[error("query {0} already active")]
    QueryAlreadyActive(QueryId),
    #[error("query {0} not active")]
    QueryNotActive(QueryId),
    #[error("query cap exceeded: at most {MAX_ACTIVE_QUERIES} active queries")]
    QueryCapExceeded,
    #[error("color {0:?} already in use")]
    ColorInUse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalQuery {
    pub id: QueryId,
    pub label: String,
    pub expression: QueryExpr,
    pub color: String,
    pub active: bool,
}

/// Saved queries plus the ordered set of active ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryBook {
    saved: BTreeMap<QueryId, FunctionalQuery>,
    active: Vec<QueryId>,
}

impl QueryBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restores a book from snapshot state; `active` flags are rederived
    /// from the active list.
    pub fn from_parts(saved: Vec<FunctionalQuery>, active: Vec<QueryId>) -> Self {
        let mut saved: BTreeMap<_, _> = saved.into_iter().map(|q| (q.id.clone(), q)).collect();
        for q in saved.values_mut() {
            q.active = active.contains(&q.id);
        }
        Self { saved, active }
    }

    pub fn saved(&self) -> impl Iterator<Item = &FunctionalQuery> {
        self.saved.values()
    }

    pub fn get(&self, id: &QueryId) -> Option<&FunctionalQuery> {
        self.saved.get(id)
    }

    pub fn active(&self) -> &[QueryId] {
        &self.active
    }

    pub fn save(
        &mut self,
        query: FunctionalQuery,
        topology: &Topology,
    ) -> Result<&FunctionalQuery, OverlayError> {
        if self.saved.contains_key(&query.id) {
            return Err(OverlayError::DuplicateQuery(query.id));
        }
        let taken = self.saved.values().any(|q| q.color == query.color)
            || topology.missions().iter().any(|m| m.color == query.color);
        if taken || query.color == NEUTRAL_COLOR {
            return Err(OverlayError::ColorInUse(query.color));
        }
        let id = query.id.clone();
        self.saved.insert(id.clone(), FunctionalQuery { active: false, ..query });
        Ok(&self.saved[&id])
    }

    pub fn activate(&mut self, id: &QueryId) -> Result<(), OverlayError> {
        let query = self
            .saved
            .get_mut(id)
            .ok_or_else(|| OverlayError::UnknownQuery(id.clone()))?;
        if query.active {
            return Err(OverlayError::QueryAlreadyActive(id.clone()));
        }
        if self.active.len() >= MAX_ACTIVE_QUERIES {
            return Err(OverlayError::QueryCapExceeded);
        }
        query.active = true;
        self.active.push(id.clone());
        Ok(())
    }

    pub fn deactivate(&mut self, id: &QueryId) -> Result<(), OverlayError> {
        let query = self
            .saved
            .get_mut(id)
            .ok_or_else(|| OverlayError::UnknownQuery(id.clone()))?;
        if !query.active {
            return Err(OverlayError::QueryNotActive(id.clone()));
        }
        query.active = false;
        self.active.retain(|q| q != id);
        Ok(())
    }
}

/// Ordered set of active mission tabs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MissionTabs {
    active: Vec<MissionId>,
}

impl MissionTabs {
    pub fn from_active(active: Vec<MissionId>) -> Self {
        Self { active }
    }

    pub fn active(&self) -> &[MissionId] {
        &self.active
    }

    pub fn activate(&mut self, id: &MissionId, topology: &Topology) -> Result<(), OverlayError> {
        if topology.mission(id).is_none() {
            return Err(OverlayError::UnknownMission(id.clone()));
        }
        if self.active.contains(id) {
            return Err(OverlayError::MissionAlreadyActive(id.clone()));
        }
        self.active.push(id.clone());
        Ok(())
    }

    pub fn deactivate(&mut self, id: &MissionId, topology: &Topology) -> Result<(), OverlayError> {
        if topology.mission(id).is_none() {
            return Err(OverlayError::UnknownMission(id.clone()));
        }
        if !self.active.contains(id) {
            return Err(OverlayError::MissionNotActive(id.clone()));
        }
        self.active.retain(|m| m != id);
        Ok(())
    }
}

/// Whether the alert's affected asset set meets `assets`, without
/// materializing the affected set.
pub fn subject_touches(
    subject: &AlertSubject,
    assets: &BTreeSet<AssetId>,
    topology: &Topology,
    pipes: &PipeRegistry,
) -> bool {
    let sub_zone_touches = |sz: &SubZoneId| {
        topology
            .sub_zone_assets(sz)
            .is_some_and(|members| members.iter().any(|a| assets.contains(a)))
    };
    match subject {
        AlertSubject::Asset(a) => assets.contains(a),
        AlertSubject::SubZone(s) => sub_zone_touches(s),
        AlertSubject::Pipe(p) => pipes
            .get(p)
            .is_some_and(|p| sub_zone_touches(&p.endpoint_a) || sub_zone_touches(&p.endpoint_b)),
    }
}

/// Panel position used to order strip stops. Pipe alerts sit at their
/// leftmost endpoint.
fn panel_position(subject: &AlertSubject, topology: &Topology, pipes: &PipeRegistry) -> (i32, i32) {
    let key = |sz: &SubZoneId| topology.layout_key(sz).unwrap_or((i32::MAX, i32::MAX));
    match subject {
        AlertSubject::Asset(a) => topology.sub_zone_of_asset(a).map(key).unwrap_or((i32::MAX, i32::MAX)),
        AlertSubject::SubZone(s) => key(s),
        AlertSubject::Pipe(p) => pipes
            .get(p)
            .map(|p| key(&p.endpoint_a).min(key(&p.endpoint_b)))
            .unwrap_or((i32::MAX, i32::MAX)),
    }
}

/// Unassigned alerts touching the mission, sweeping the panel left to
/// right: (zone rank, sub-zone rank, raised_at, id).
pub fn compute_strip<'a>(
    topology: &Topology,
    live: impl IntoIterator<Item = &'a Alert>,
    pipes: &PipeRegistry,
    mission: &MissionId,
) -> Result<Vec<AlertId>, OverlayError> {
    let deps = topology
        .mission_dependency_set(mission)
        .map_err(|_| OverlayError::UnknownMission(mission.clone()))?;
    let mut stops: Vec<_> = live
        .into_iter()
        .filter(|a| a.status == AlertStatus::Unassigned)
        .filter(|a| subject_touches(&a.subject, deps, topology, pipes))
        .map(|a| (panel_position(&a.subject, topology, pipes), a.raised_at, &a.id))
        .collect();
    stops.sort();
    Ok(stops.into_iter().map(|(_, _, id)| id.clone()).collect())
}

/// Live alerts touching any active mission; these render as individual
/// badges, everything else stays inside the ovals.
pub fn individual_badges<'a>(
    live: impl IntoIterator<Item = &'a Alert>,
    active_missions: &[MissionId],
    topology: &Topology,
    pipes: &PipeRegistry,
) -> BTreeSet<AlertId> {
    let deps: Vec<&BTreeSet<AssetId>> = active_missions
        .iter()
        .filter_map(|m| topology.mission_dependency_set(m).ok())
        .collect();
    if deps.is_empty() {
        return BTreeSet::new();
    }
    live.into_iter()
        .filter(|a| deps.iter().any(|d| subject_touches(&a.subject, d, topology, pipes)))
        .map(|a| a.id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuEntry {
    pub alert_id: AlertId,
    pub category: AlertCategory,
    pub text: String,
    pub capsule_left: String,
    pub capsule_right: StatusColor,
}

/// Warning menu: grouped Health, Security, Performance; within a group
/// active-mission alerts first, then Unassigned before Tasked, then newest
/// first.
pub fn build_menu<'a>(
    live: impl IntoIterator<Item = &'a Alert>,
    active_missions: &[MissionId],
    topology: &Topology,
) -> Vec<MenuEntry> {
    let mut alerts: Vec<&Alert> = live
        .into_iter()
        .filter(|a| a.status != AlertStatus::Resolved)
        .collect();
    alerts.sort_by_key(|a| {
        let boosted = a
            .primary_mission
            .as_ref()
            .is_some_and(|m| active_missions.contains(m));
        (a.category, !boosted, a.status, Reverse(a.raised_at), &a.id)
    });
    alerts
        .into_iter()
        .map(|a| MenuEntry {
            alert_id: a.id.clone(),
            category: a.category,
            text: a.summary.clone(),
            capsule_left: a
                .primary_mission
                .as_ref()
                .and_then(|m| topology.mission(m))
                .map(|m| m.color.clone())
                .unwrap_or_else(|| NEUTRAL_COLOR.to_owned()),
            capsule_right: a.status.color().expect("live alert has a color"),
        })
        .collect()
}

/// Indices shown for one category group of `len` entries given `share`
/// slots at `tick`.
pub fn window_indices(len: usize, share: usize, tick: u64) -> Vec<usize> {
    if len <= share {
        return (0..len).collect();
    }
    let start = (tick % len as u64) as usize;
    (0..share).map(|j| (start + j) % len).collect()
}

/// Scrolling view of the menu. The window is split evenly among non-empty
/// category groups (earlier groups take the remainder, every group gets at
/// least one slot) and each group rotates by one entry per tick.
pub fn menu_window(menu: &[MenuEntry], window_size: usize, tick: u64) -> Vec<&MenuEntry> {
    let window_size = window_size.max(1);
    let groups: Vec<&[MenuEntry]> = menu.chunk_by(|a, b| a.category == b.category).collect();
    if groups.is_empty() {
        return Vec::new();
    }
    let base = window_size / groups.len();
    let extra = window_size % groups.len();
    groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| {
            let share = (base + usize::from(g < extra)).max(1);
            window_indices(group.len(), share, tick)
                .into_iter()
                .map(move |i| &group[i])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryHighlight {
    pub color: String,
    pub assets: BTreeSet<AssetId>,
    pub sub_zones: BTreeSet<SubZoneId>,
}

/// View controls plus every derived layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardView {
    pub active_missions: Vec<MissionId>,
    pub active_queries: Vec<QueryId>,
    pub mission_highlights: BTreeMap<MissionId, BTreeSet<SubZoneId>>,
    pub query_highlights: BTreeMap<QueryId, QueryHighlight>,
    pub strip: BTreeMap<MissionId, Vec<AlertId>>,
    pub individual_badges: BTreeSet<AlertId>,
    pub aggregate_badges: Vec<AggregateBadge>,
    pub menu: Vec<MenuEntry>,
    pub visible_pipes: Vec<PipeId>,
}

impl BoardView {
    pub fn derive(
        topology: &Topology,
        alerts: &AlertEngine,
        pipes: &PipeRegistry,
        queries: &QueryBook,
        missions: &MissionTabs,
    ) -> Self {
        let active_missions = missions.active().to_vec();
        let mission_highlights = active_missions
            .iter()
            .map(|m| (m.clone(), mission_sub_zones(topology, [m])))
            .collect();
        let strip = active_missions
            .iter()
            .map(|m| {
                let s = compute_strip(topology, alerts.live(), pipes, m).unwrap_or_default();
                (m.clone(), s)
            })
            .collect();
        let query_highlights = queries
            .active()
            .iter()
            .filter_map(|id| queries.get(id))
            .map(|q| {
                let assets = evaluate_query(&q.expression, topology);
                let sub_zones = topology.subzones_touching(&assets).unwrap_or_default();
                (
                    q.id.clone(),
                    QueryHighlight {
                        color: q.color.clone(),
                        assets,
                        sub_zones,
                    },
                )
            })
            .collect();
        Self {
            individual_badges: individual_badges(alerts.live(), &active_missions, topology, pipes),
            aggregate_badges: aggregate_badges(alerts.live(), topology),
            menu: build_menu(alerts.live(), &active_missions, topology),
            visible_pipes: visible_pipes(pipes.live(), &active_missions, topology)
                .into_iter()
                .map(|p| p.id.clone())
                .collect(),
            active_queries: queries.active().to_vec(),
            active_missions,
            mission_highlights,
            query_highlights,
            strip,
        }
    }
}
