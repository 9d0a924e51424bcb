//! Brute-force reference implementations and random input generators shared
//! by the integration and acceptance tests. Oracles deliberately avoid the
//! topology index and the library's helper functions: they rescan the raw
//! zone/sub-zone tree every time.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::sync::Arc;

use bigboard_core::alert::{AggregateBadge, Alert, AlertCategory, AlertStatus, AlertSubject, StatusColor};
use bigboard_core::command::{ClientIdentity, Command, CommandBody};
use bigboard_core::ids::{AlertId, AssetId, MissionId, PipeId, SubZoneId};
use bigboard_core::overlay::MenuEntry;
use bigboard_core::pipes::Pipe;
use bigboard_core::query::{Atom, QueryExpr};
use bigboard_core::sim::{generate_fixture, SimRng};
use bigboard_core::state::BoardState;
use bigboard_core::topology::{Asset, Topology};

pub fn fixture(n: usize) -> Arc<Topology> {
    Arc::new(generate_fixture(n).unwrap())
}

// ---------------------------------------------------------------- topology

fn find_sub_zone<'t>(t: &'t Topology, id: &SubZoneId) -> Option<((i32, i32), Vec<&'t AssetId>)> {
    for z in t.zones() {
        for s in &z.sub_zones {
            if &s.id == id {
                return Some(((z.layout_rank, s.layout_rank), s.assets.iter().map(|a| &a.id).collect()));
            }
        }
    }
    None
}

fn sub_zone_holding<'t>(t: &'t Topology, asset: &AssetId) -> Option<&'t SubZoneId> {
    for z in t.zones() {
        for s in &z.sub_zones {
            if s.assets.iter().any(|a| &a.id == asset) {
                return Some(&s.id);
            }
        }
    }
    None
}

fn mission_deps(t: &Topology, m: &MissionId) -> BTreeSet<AssetId> {
    t.missions()
        .iter()
        .find(|x| &x.id == m)
        .map(|x| x.dependency_asset_ids.clone())
        .unwrap_or_default()
}

fn layout_of(t: &Topology, sz: &SubZoneId) -> (i32, i32) {
    find_sub_zone(t, sz).map(|(k, _)| k).unwrap_or((i32::MAX, i32::MAX))
}

pub fn oracle_affected(subject: &AlertSubject, t: &Topology, pipes: &[&Pipe]) -> BTreeSet<AssetId> {
    let sz_assets = |sz: &SubZoneId| -> BTreeSet<AssetId> {
        find_sub_zone(t, sz).map(|(_, a)| a.into_iter().cloned().collect()).unwrap_or_default()
    };
    match subject {
        AlertSubject::Asset(a) => BTreeSet::from([a.clone()]),
        AlertSubject::SubZone(s) => sz_assets(s),
        AlertSubject::Pipe(p) => pipes
            .iter()
            .find(|x| &x.id == p)
            .map(|x| {
                let mut s = sz_assets(&x.endpoint_a);
                s.extend(sz_assets(&x.endpoint_b));
                s
            })
            .unwrap_or_default(),
    }
}

fn oracle_position(subject: &AlertSubject, t: &Topology, pipes: &[&Pipe]) -> (i32, i32) {
    match subject {
        AlertSubject::Asset(a) => sub_zone_holding(t, a).map(|s| layout_of(t, s)).unwrap_or((i32::MAX, i32::MAX)),
        AlertSubject::SubZone(s) => layout_of(t, s),
        AlertSubject::Pipe(p) => pipes
            .iter()
            .find(|x| &x.id == p)
            .map(|x| {
                let a = layout_of(t, &x.endpoint_a);
                let b = layout_of(t, &x.endpoint_b);
                if a <= b { a } else { b }
            })
            .unwrap_or((i32::MAX, i32::MAX)),
    }
}

// ---------------------------------------------------------------- alerts

/// Group-by recount of live alerts into per-sub-zone ovals, panel order.
pub fn oracle_aggregate(state: &BoardState) -> Vec<AggregateBadge> {
    let t = state.topology();
    let live: Vec<&Alert> = state.alerts().live().collect();
    let mut out = Vec::new();
    let mut zones: Vec<_> = t.zones().iter().collect();
    zones.sort_by_key(|z| z.layout_rank);
    for z in zones {
        let mut subs: Vec<_> = z.sub_zones.iter().collect();
        subs.sort_by_key(|s| s.layout_rank);
        for s in subs {
            let (mut red, mut yellow) = (0, 0);
            for a in &live {
                let home = match &a.subject {
                    AlertSubject::Asset(x) => s.assets.iter().any(|y| &y.id == x),
                    AlertSubject::SubZone(x) => x == &s.id,
                    AlertSubject::Pipe(_) => false,
                };
                if home {
                    match a.status {
                        AlertStatus::Unassigned => red += 1,
                        AlertStatus::Tasked => yellow += 1,
                        AlertStatus::Resolved => {}
                    }
                }
            }
            if red + yellow > 0 {
                out.push(AggregateBadge { sub_zone_id: s.id.clone(), red_count: red, yellow_count: yellow });
            }
        }
    }
    out
}

/// Mission with the largest dependency overlap, lowest rank on ties.
pub fn oracle_primary_mission(subject: &AlertSubject, t: &Topology, pipes: &[&Pipe]) -> Option<MissionId> {
    let affected = oracle_affected(subject, t, pipes);
    let mut best: Option<(usize, i32, MissionId)> = None;
    for m in t.missions() {
        let n = affected.intersection(&m.dependency_asset_ids).count();
        if n == 0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bn, br, _)) => n > *bn || (n == *bn && m.rank < *br),
        };
        if better {
            best = Some((n, m.rank, m.id.clone()));
        }
    }
    best.map(|(_, _, m)| m)
}

// ---------------------------------------------------------------- overlays

pub fn oracle_strip(state: &BoardState, mission: &MissionId) -> Vec<AlertId> {
    let t = state.topology();
    let pipes: Vec<&Pipe> = state.pipes().live().collect();
    let deps = mission_deps(t, mission);
    let mut hits: Vec<&Alert> = state
        .alerts()
        .live()
        .filter(|a| a.status == AlertStatus::Unassigned)
        .filter(|a| !oracle_affected(&a.subject, t, &pipes).is_disjoint(&deps))
        .collect();
    hits.sort_by(|x, y| {
        oracle_position(&x.subject, t, &pipes)
            .cmp(&oracle_position(&y.subject, t, &pipes))
            .then(x.raised_at.cmp(&y.raised_at))
            .then(x.id.cmp(&y.id))
    });
    hits.into_iter().map(|a| a.id.clone()).collect()
}

pub fn oracle_individual(state: &BoardState, active: &[MissionId]) -> BTreeSet<AlertId> {
    let t = state.topology();
    let pipes: Vec<&Pipe> = state.pipes().live().collect();
    let mut out = BTreeSet::new();
    for m in active {
        let deps = mission_deps(t, m);
        for a in state.alerts().live() {
            if !oracle_affected(&a.subject, t, &pipes).is_disjoint(&deps) {
                out.insert(a.id.clone());
            }
        }
    }
    out
}

pub fn oracle_visible_pipes(state: &BoardState, active: &[MissionId]) -> Vec<PipeId> {
    let t = state.topology();
    let mut keep: Vec<&Pipe> = state
        .pipes()
        .live()
        .filter(|p| {
            active.is_empty()
                || active.iter().any(|m| {
                    let deps = mission_deps(t, m);
                    [&p.endpoint_a, &p.endpoint_b].into_iter().any(|end| {
                        find_sub_zone(t, end).is_some_and(|(_, assets)| assets.iter().any(|a| deps.contains(*a)))
                    })
                })
        })
        .collect();
    keep.sort_by(|x, y| x.opened_at.cmp(&y.opened_at).then(x.seq.cmp(&y.seq)));
    keep.into_iter().map(|p| p.id.clone()).collect()
}

fn category_rank(c: AlertCategory) -> u8 {
    match c {
        AlertCategory::Health => 0,
        AlertCategory::Security => 1,
        AlertCategory::Performance => 2,
    }
}

pub fn oracle_menu(state: &BoardState, active: &[MissionId]) -> Vec<MenuEntry> {
    let t = state.topology();
    let mut alerts: Vec<&Alert> = state.alerts().live().collect();
    let boosted = |a: &Alert| a.primary_mission.as_ref().is_some_and(|m| active.contains(m));
    alerts.sort_by(|x, y| {
        let c = category_rank(x.category).cmp(&category_rank(y.category));
        if c != Ordering::Equal {
            return c;
        }
        match (boosted(x), boosted(y)) {
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let red = |a: &Alert| a.status == AlertStatus::Unassigned;
        match (red(x), red(y)) {
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        y.raised_at.cmp(&x.raised_at).then(x.id.cmp(&y.id))
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
                .and_then(|m| t.missions().iter().find(|x| &x.id == m))
                .map(|m| m.color.clone())
                .unwrap_or_else(|| "neutral".to_owned()),
            capsule_right: if a.status == AlertStatus::Unassigned { StatusColor::Red } else { StatusColor::Yellow },
        })
        .collect()
}

// ---------------------------------------------------------------- queries

/// Plain recursive glob, independent of the library's iterative one.
pub fn oracle_glob(p: &[char], t: &[char]) -> bool {
    match (p.first(), t.first()) {
        (None, None) => true,
        (Some('*'), _) => oracle_glob(&p[1..], t) || (!t.is_empty() && oracle_glob(p, &t[1..])),
        (Some('?'), Some(_)) => oracle_glob(&p[1..], &t[1..]),
        (Some(a), Some(b)) if a == b => oracle_glob(&p[1..], &t[1..]),
        _ => false,
    }
}

fn in_cidr(addr: Ipv4Addr, net: Ipv4Addr, len: u8) -> bool {
    let mask = if len == 0 { 0 } else { u32::MAX << (32 - u32::from(len)) };
    u32::from(addr) & mask == u32::from(net) & mask
}

pub fn oracle_atom(atom: &Atom, asset: &Asset) -> bool {
    let lower = |s: &str| s.to_lowercase();
    match atom {
        Atom::Geo(v) => asset.geo_tags.iter().any(|g| lower(g) == lower(v)),
        Atom::Tag(v) => asset.function_tags.iter().any(|g| lower(g) == lower(v)),
        Atom::Host(g) => {
            let p: Vec<char> = lower(g).chars().collect();
            let h: Vec<char> = lower(&asset.hostname).chars().collect();
            oracle_glob(&p, &h)
        }
        Atom::Ip(net) => asset.addresses.iter().any(|a| in_cidr(*a, net.addr(), net.prefix_len())),
    }
}

pub fn oracle_pred(expr: &QueryExpr, asset: &Asset) -> bool {
    match expr {
        QueryExpr::Atom(a) => oracle_atom(a, asset),
        QueryExpr::Not(e) => !oracle_pred(e, asset),
        QueryExpr::And(a, b) => oracle_pred(a, asset) && oracle_pred(b, asset),
        QueryExpr::Or(a, b) => oracle_pred(a, asset) || oracle_pred(b, asset),
    }
}

pub fn oracle_eval(expr: &QueryExpr, t: &Topology) -> BTreeSet<AssetId> {
    let mut out = BTreeSet::new();
    for z in t.zones() {
        for s in &z.sub_zones {
            for a in &s.assets {
                if oracle_pred(expr, a) {
                    out.insert(a.id.clone());
                }
            }
        }
    }
    out
}

const GEO: &[&str] = &[
    "australia", "Australia", "sydney", "boston", "united-states", "europe", "asia", "north-america",
    "tokyo", "mars", "we\"ird", "back\\slash",
];
const TAGS: &[&str] = &[
    "voip", "docs", "stream", "dns", "java-unpatched", "proxy-bypass", "beaconing", "workstation",
    "PRINTER", "email", "nonexistent",
];
const HOSTS: &[&str] = &["bos-*", "syd-vc-0?", "*-vc-*", "*", "dc?-*", "xp-gw-01", "?", "*mail*", "nope-*"];

pub fn random_atom(rng: &mut SimRng) -> Atom {
    match rng.below(4) {
        0 => Atom::Geo(GEO[rng.below(GEO.len() as u64) as usize].into()),
        1 => Atom::Tag(TAGS[rng.below(TAGS.len() as u64) as usize].into()),
        2 => Atom::Host(HOSTS[rng.below(HOSTS.len() as u64) as usize].into()),
        _ => {
            let base = if rng.chance(0.3) {
                Ipv4Addr::new(194, 220, 1, rng.below(256) as u8)
            } else {
                Ipv4Addr::new(10, rng.below(8) as u8, rng.below(256) as u8, rng.below(256) as u8)
            };
            let len = [0u8, 8, 12, 16, 20, 24, 28, 32][rng.below(8) as usize];
            Atom::Ip(ipnet::Ipv4Net::new(base, len).unwrap())
        }
    }
}

pub fn random_query(rng: &mut SimRng, depth: u32) -> QueryExpr {
    if depth == 0 || rng.chance(0.3) {
        return QueryExpr::Atom(random_atom(rng));
    }
    match rng.below(3) {
        0 => QueryExpr::not(random_query(rng, depth - 1)),
        1 => QueryExpr::and(random_query(rng, depth - 1), random_query(rng, depth - 1)),
        _ => QueryExpr::or(random_query(rng, depth - 1), random_query(rng, depth - 1)),
    }
}

// ---------------------------------------------------------------- fuzzer

/// Random command source over a topology. Aims for a mix of accepted and
/// rejected commands across every kind and both roles.
pub struct Fuzzer {
    pub rng: SimRng,
    assets: Vec<AssetId>,
    sub_zones: Vec<SubZoneId>,
    missions: Vec<MissionId>,
    n: u64,
    at: u64,
}

const QUERY_COLORS: &[&str] = &[
    "c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10", "c11", "blue", "neutral",
];

impl Fuzzer {
    pub fn new(seed: u64, topology: &Topology) -> Self {
        let mut missions: Vec<MissionId> = topology.missions().iter().map(|m| m.id.clone()).collect();
        missions.push("m99".into());
        Self {
            rng: SimRng::new(seed),
            assets: topology.assets().map(|a| a.id.clone()).collect(),
            sub_zones: topology.sub_zones().map(|(_, s)| s.id.clone()).collect(),
            missions,
            n: 0,
            at: 1_000_000,
        }
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs[self.rng.below(xs.len() as u64) as usize].clone()
    }

    fn some_alert(&mut self, state: &BoardState) -> AlertId {
        let live = state.alerts().live_count();
        if live > 0 && self.rng.chance(0.8) {
            let k = self.rng.below(live as u64) as usize;
            state.alerts().live().nth(k).unwrap().id.clone()
        } else {
            self.pool_alert()
        }
    }

    fn pool_alert(&mut self) -> AlertId {
        let span = self.n / 3 + 20;
        AlertId::new(format!("f{}", self.rng.below(span)))
    }

    fn fraction(&mut self) -> f64 {
        if self.rng.chance(0.05) {
            if self.rng.chance(0.5) { 1.2 } else { -0.1 }
        } else {
            (self.rng.unit() * 100.0).round() / 100.0
        }
    }

    pub fn next(&mut self, state: &BoardState) -> Command {
        self.n += 1;
        self.at += self.rng.below(1000);
        let at = if self.rng.chance(0.02) { self.at.saturating_sub(5_000) } else { self.at };
        let manager = self.rng.chance(0.5);
        let issuer = if manager {
            ClientIdentity::manager("boss")
        } else {
            let who = self.pick(&["amy", "raj", "telemetry"]);
            ClientIdentity::member(who)
        };
        let body = match self.rng.below(100) {
            0..=29 => {
                let alert_id = if self.rng.chance(0.02) {
                    AlertId::new(format!("pipe-{}", self.rng.below(5)))
                } else {
                    self.pool_alert()
                };
                let subject = match self.rng.below(20) {
                    0 => AlertSubject::Asset("ghost".into()),
                    1 => AlertSubject::Pipe(PipeId::new(format!("pipe-{}", self.rng.below(8)))),
                    2..=7 => AlertSubject::SubZone(self.pick(&self.sub_zones.clone())),
                    _ => AlertSubject::Asset(self.pick(&self.assets.clone())),
                };
                CommandBody::RaiseAlert {
                    alert_id,
                    category: self.pick(&AlertCategory::ALL),
                    subject,
                    summary: format!("fuzz {}", self.n),
                }
            }
            30..=44 => CommandBody::TaskAlert {
                alert_id: self.some_alert(state),
                ticket_id: format!("T{}", self.rng.below(self.n + 10)).into(),
                assignee: "amy".into(),
            },
            45..=56 => CommandBody::ResolveAlert { alert_id: self.some_alert(state) },
            57..=68 => {
                let few = &self.sub_zones[..6.min(self.sub_zones.len())].to_vec();
                CommandBody::ReportFlow {
                    endpoint_a: self.pick(few),
                    endpoint_b: self.pick(few),
                    available_fraction: self.fraction(),
                    current_fraction: self.fraction(),
                }
            }
            69..=74 => CommandBody::AddTicketNote {
                alert_id: self.some_alert(state),
                text: format!("note {}", self.n),
            },
            75..=79 => CommandBody::ActivateMission { mission_id: self.pick(&self.missions.clone()) },
            80..=84 => CommandBody::DeactivateMission { mission_id: self.pick(&self.missions.clone()) },
            85..=88 => CommandBody::SaveQuery {
                query_id: format!("q{}", self.rng.below(12)).into(),
                label: "fuzz".into(),
                expression: random_query(&mut self.rng, 2),
                color: self.pick(QUERY_COLORS).into(),
            },
            89..=94 => CommandBody::ActivateQuery { query_id: format!("q{}", self.rng.below(12)).into() },
            _ => CommandBody::DeactivateQuery { query_id: format!("q{}", self.rng.below(12)).into() },
        };
        // occasional replay of an earlier command id
        let id = if self.n > 10 && self.rng.chance(0.01) {
            format!("fz{}", self.rng.below(self.n - 1) + 1)
        } else {
            format!("fz{}", self.n)
        };
        Command::new(id, issuer, at, body)
    }
}

/// Last observed status per alert id; `Resolved` once it leaves the live set.
pub type StatusLedger = BTreeMap<AlertId, AlertStatus>;

/// Updates `ledger` from `state` and returns any illegal transition seen.
pub fn check_transitions(ledger: &mut StatusLedger, state: &BoardState) -> Option<String> {
    let live: BTreeMap<&AlertId, AlertStatus> = state.alerts().live().map(|a| (&a.id, a.status)).collect();
    for (id, prev) in ledger.iter_mut() {
        let now = live.get(id).copied().unwrap_or(AlertStatus::Resolved);
        let ok = *prev == now
            || matches!(
                (*prev, now),
                (AlertStatus::Unassigned, AlertStatus::Tasked)
                    | (AlertStatus::Unassigned, AlertStatus::Resolved)
                    | (AlertStatus::Tasked, AlertStatus::Resolved)
            );
        if !ok {
            return Some(format!("{id}: {prev:?} -> {now:?}"));
        }
        *prev = now;
    }
    for (id, status) in live {
        if !ledger.contains_key(id) {
            if status != AlertStatus::Unassigned {
                // raising always starts red
                return Some(format!("{id}: appeared as {status:?}"));
            }
            ledger.insert(id.clone(), status);
        }
    }
    None
}
