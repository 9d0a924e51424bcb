//! Seeded telemetry and team-behavior generator.
//!
//! Alert arrivals per category and flow faults are independent Poisson
//! processes (exponential gaps from [`SimRng`]), merged in time order. At
//! every whole simulated second the team acts: each Unassigned alert is
//! tasked with the per-second equivalent of `task_probability`, each Tasked
//! alert resolved with that of `resolve_probability`, and each live pipe
//! gets a throughput update with probability [`PIPE_UPDATE_CHANCE`].
//!
//! The generator mirrors just enough board state to only ever emit commands
//! a fresh server accepts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fixture::{generate_fixture, FixtureError};
use super::rng::SimRng;
use crate::alert::{AlertCategory, AlertSubject, PIPE_ALERT_PREFIX};
use crate::command::{ClientIdentity, Command, CommandBody, CommandKind};
use crate::ids::{AlertId, AssetId, SubZoneId};
use crate::topology::Topology;

/// Per-second chance that a live pipe reports fresh throughput.
pub const PIPE_UPDATE_CHANCE: f64 = 0.1;

/// 2013-07-01T00:00:00Z
pub const DEFAULT_START_MS: u64 = 1_372_636_800_000;

pub const TELEMETRY_CLIENT: &str = "telemetry";

const TEAM: [&str; 4] = ["amy", "raj", "lee", "sam"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    Config(String),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("sink failed after {emitted} commands: {message}")]
    Sink { emitted: u64, message: String },
}

/// Alert arrivals per simulated minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryRates {
    pub health: f64,
    pub security: f64,
    pub performance: f64,
}

impl CategoryRates {
    pub fn get(&self, c: AlertCategory) -> f64 {
        match c {
            AlertCategory::Health => self.health,
            AlertCategory::Security => self.security,
            AlertCategory::Performance => self.performance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Simulated seconds.
    pub duration: u64,
    pub asset_count: usize,
    pub rates: CategoryRates,
    /// New pipes per simulated hour.
    pub flow_fault_rate: f64,
    /// Per alert per simulated minute.
    pub task_probability: f64,
    /// Per tasked alert per simulated minute.
    pub resolve_probability: f64,
    pub start_ms: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            duration: 3600,
            asset_count: super::fixture::BIG_ENTERPRISE_ASSETS,
            rates: CategoryRates {
                health: 2.0,
                security: 1.0,
                performance: 1.0,
            },
            flow_fault_rate: 6.0,
            task_probability: 0.3,
            resolve_probability: 0.1,
            start_ms: DEFAULT_START_MS,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let rates = [
            ("rates.health", self.rates.health),
            ("rates.security", self.rates.security),
            ("rates.performance", self.rates.performance),
            ("flow_fault_rate", self.flow_fault_rate),
        ];
        for (name, r) in rates {
            if !(r.is_finite() && r >= 0.0) {
                return Err(ScenarioError::Config(format!("{name} must be >= 0, got {r}")));
            }
        }
        for (name, p) in [
            ("task_probability", self.task_probability),
            ("resolve_probability", self.resolve_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

pub trait CommandSink {
    type Error: std::fmt::Display;

    fn accept(&mut self, command: Command) -> Result<(), Self::Error>;
}

impl CommandSink for Vec<Command> {
    type Error = std::convert::Infallible;

    fn accept(&mut self, command: Command) -> Result<(), Self::Error> {
        self.push(command);
        Ok(())
    }
}

/// Writes one canonical command record per line.
pub struct NdjsonSink<W: std::io::Write>(pub W);

impl<W: std::io::Write> CommandSink for NdjsonSink<W> {
    type Error = std::io::Error;

    fn accept(&mut self, command: Command) -> Result<(), Self::Error> {
        writeln!(self.0, "{}", command.to_line())
    }
}

/// Adapts a closure into a sink.
pub struct FnSink<F>(pub F);

impl<F, E> CommandSink for FnSink<F>
where
    F: FnMut(Command) -> Result<(), E>,
    E: std::fmt::Display,
{
    type Error = E;

    fn accept(&mut self, command: Command) -> Result<(), E> {
        (self.0)(command)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub raise_alert: u64,
    pub task_alert: u64,
    pub resolve_alert: u64,
    pub report_flow: u64,
    pub raised_by_category: BTreeMap<AlertCategory, u64>,
}

impl RunSummary {
    pub fn total(&self) -> u64 {
        self.raise_alert + self.task_alert + self.resolve_alert + self.report_flow
    }

    fn count(&mut self, cmd: &Command) {
        match &cmd.body {
            CommandBody::RaiseAlert { category, .. } => {
                self.raise_alert += 1;
                *self.raised_by_category.entry(*category).or_default() += 1;
            }
            CommandBody::TaskAlert { .. } => self.task_alert += 1,
            CommandBody::ResolveAlert { .. } => self.resolve_alert += 1,
            CommandBody::ReportFlow { .. } => self.report_flow += 1,
            _ => unreachable!("simulator emits only telemetry and team commands"),
        }
    }

    pub fn by_kind(&self, kind: CommandKind) -> u64 {
        match kind {
            CommandKind::RaiseAlert => self.raise_alert,
            CommandKind::TaskAlert => self.task_alert,
            CommandKind::ResolveAlert => self.resolve_alert,
            CommandKind::ReportFlow => self.report_flow,
            _ => 0,
        }
    }
}

const HEALTH_SUMMARIES: [&str; 4] =
    ["host unreachable", "disk failure predicted", "service crashed", "high memory pressure"];
const SECURITY_SUMMARIES: [&str; 4] =
    ["malware signature match", "beaconing detected", "brute-force logins", "policy violation"];
const PERFORMANCE_SUMMARIES: [&str; 4] =
    ["latency above threshold", "packet loss", "cpu saturation", "queue backlog"];

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MirrorStatus {
    Unassigned,
    Tasked,
}

struct Generator<'a, S: CommandSink> {
    cfg: &'a ScenarioConfig,
    rng: SimRng,
    sink: &'a mut S,
    summary: RunSummary,
    assets: Vec<AssetId>,
    sub_zones: Vec<SubZoneId>,
    /// creation order -> (id, status)
    live: BTreeMap<u64, (AlertId, MirrorStatus)>,
    pipes_by_pair: BTreeMap<(usize, usize), (AlertId, f64)>,
    pipe_alerts: BTreeSet<AlertId>,
    next_pipe: u64,
    next_alert: u64,
    next_command: u64,
}

impl<'a, S: CommandSink> Generator<'a, S> {
    fn emit(&mut self, issuer: ClientIdentity, at_s: f64, body: CommandBody) -> Result<(), ScenarioError> {
        self.next_command += 1;
        let at = self.cfg.start_ms + (at_s * 1000.0).floor() as u64;
        let cmd = Command::new(
            format!("sim-{}-{}", self.cfg.seed, self.next_command),
            issuer,
            at,
            body,
        );
        self.summary.count(&cmd);
        self.sink.accept(cmd).map_err(|e| ScenarioError::Sink {
            emitted: self.summary.total() - 1,
            message: e.to_string(),
        })
    }

    fn raise(&mut self, category: AlertCategory, t: f64) -> Result<(), ScenarioError> {
        if self.assets.is_empty() {
            return Ok(());
        }
        // three in four alerts target a single asset, the rest a whole sub-zone
        let subject = if self.rng.below(4) < 3 {
            let i = self.rng.below(self.assets.len() as u64) as usize;
            AlertSubject::Asset(self.assets[i].clone())
        } else {
            let i = self.rng.below(self.sub_zones.len() as u64) as usize;
            AlertSubject::SubZone(self.sub_zones[i].clone())
        };
        let templates = match category {
            AlertCategory::Health => HEALTH_SUMMARIES,
            AlertCategory::Security => SECURITY_SUMMARIES,
            AlertCategory::Performance => PERFORMANCE_SUMMARIES,
        };
        let summary = templates[self.rng.below(templates.len() as u64) as usize].to_owned();
        self.next_alert += 1;
        let alert_id = AlertId::new(format!("sim-{}-a{}", self.cfg.seed, self.next_alert));
        self.live.insert(self.next_alert, (alert_id.clone(), MirrorStatus::Unassigned));
        self.emit(
            ClientIdentity::member(TELEMETRY_CLIENT),
            t,
            CommandBody::RaiseAlert {
                alert_id,
                category,
                subject,
                summary,
            },
        )
    }

    fn flow_fault(&mut self, t: f64) -> Result<(), ScenarioError> {
        let n = self.sub_zones.len() as u64;
        if n < 2 {
            return Ok(());
        }
        let a = self.rng.below(n) as usize;
        let mut b = self.rng.below(n - 1) as usize;
        if b >= a {
            b += 1;
        }
        let key = (a.min(b), a.max(b));
        let available = round2(0.1 + 0.6 * self.rng.unit());
        let current = round2(available * self.rng.unit());
        if let Some(entry) = self.pipes_by_pair.get_mut(&key) {
            entry.1 = available;
        } else {
            self.next_pipe += 1;
            self.next_alert += 1;
            let id = AlertId::new(format!("{PIPE_ALERT_PREFIX}{}", self.next_pipe));
            self.pipes_by_pair.insert(key, (id.clone(), available));
            self.pipe_alerts.insert(id.clone());
            self.live.insert(self.next_alert, (id, MirrorStatus::Unassigned));
        }
        self.emit(
            ClientIdentity::member(TELEMETRY_CLIENT),
            t,
            CommandBody::ReportFlow {
                endpoint_a: self.sub_zones[a].clone(),
                endpoint_b: self.sub_zones[b].clone(),
                available_fraction: available,
                current_fraction: current,
            },
        )
    }

    fn team_tick(&mut self, t: f64, p_task: f64, p_resolve: f64) -> Result<(), ScenarioError> {
        let keys: Vec<u64> = self.live.keys().copied().collect();
        for key in keys {
            let (id, status) = self.live[&key].clone();
            let member = TEAM[(key % TEAM.len() as u64) as usize];
            match status {
                MirrorStatus::Unassigned if self.rng.chance(p_task) => {
                    self.live.insert(key, (id.clone(), MirrorStatus::Tasked));
                    self.emit(
                        ClientIdentity::member(member),
                        t,
                        CommandBody::TaskAlert {
                            ticket_id: format!("T-{id}").into(),
                            alert_id: id,
                            assignee: member.to_owned(),
                        },
                    )?;
                }
                MirrorStatus::Tasked if self.rng.chance(p_resolve) => {
                    self.live.remove(&key);
                    if self.pipe_alerts.remove(&id) {
                        self.pipes_by_pair.retain(|_, (pid, _)| pid != &id);
                    }
                    self.emit(
                        ClientIdentity::member(member),
                        t,
                        CommandBody::ResolveAlert { alert_id: id },
                    )?;
                }
                _ => {}
            }
        }
        let pairs: Vec<((usize, usize), f64)> =
            self.pipes_by_pair.iter().map(|(k, (_, avail))| (*k, *avail)).collect();
        for ((a, b), available) in pairs {
            if self.rng.chance(PIPE_UPDATE_CHANCE) {
                let current = round2(available * self.rng.unit());
                self.emit(
                    ClientIdentity::member(TELEMETRY_CLIENT),
                    t,
                    CommandBody::ReportFlow {
                        endpoint_a: self.sub_zones[a].clone(),
                        endpoint_b: self.sub_zones[b].clone(),
                        available_fraction: available,
                        current_fraction: current,
                    },
                )?;
            }
        }
        Ok(())
    }
}

/// Per-second hazard equivalent to a per-minute probability.
fn per_second(p_minute: f64) -> f64 {
    1.0 - (1.0 - p_minute).powf(1.0 / 60.0)
}

/// Runs the scenario against the fixture topology generated for
/// `config.asset_count`, feeding every command to `sink` in time order.
pub fn run<S: CommandSink>(config: &ScenarioConfig, sink: &mut S) -> Result<RunSummary, ScenarioError> {
    let topology = generate_fixture(config.asset_count)?;
    run_on(config, &topology, sink)
}

/// Like [`run`] but over a caller-supplied topology.
pub fn run_on<S: CommandSink>(
    config: &ScenarioConfig,
    topology: &Topology,
    sink: &mut S,
) -> Result<RunSummary, ScenarioError> {
    config.validate()?;
    let mut gen = Generator {
        cfg: config,
        rng: SimRng::new(config.seed),
        sink,
        summary: RunSummary::default(),
        assets: topology.assets().map(|a| a.id.clone()).collect(),
        sub_zones: topology.sub_zones().map(|(_, s)| s.id.clone()).collect(),
        live: BTreeMap::new(),
        pipes_by_pair: BTreeMap::new(),
        pipe_alerts: BTreeSet::new(),
        next_pipe: 0,
        next_alert: 0,
        next_command: 0,
    };

    // processes: 0..3 alert categories, 3 flow faults; rates per second
    let rates = [
        config.rates.health / 60.0,
        config.rates.security / 60.0,
        config.rates.performance / 60.0,
        config.flow_fault_rate / 3600.0,
    ];
    let mut next: Vec<f64> = rates
        .iter()
        .map(|&r| if r > 0.0 { gen.rng.exponential(r) } else { f64::INFINITY })
        .collect();
    let duration = config.duration as f64;
    let p_task = per_second(config.task_probability);
    let p_resolve = per_second(config.resolve_probability);

    for second in 1..=config.duration {
        let boundary = second as f64;
        loop {
            let (proc, &t) = next
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("four processes");
            if t >= boundary || t >= duration {
                break;
            }
            match proc {
                0 => gen.raise(AlertCategory::Health, t)?,
                1 => gen.raise(AlertCategory::Security, t)?,
                2 => gen.raise(AlertCategory::Performance, t)?,
                _ => gen.flow_fault(t)?,
            }
            next[proc] = t + gen.rng.exponential(rates[proc]);
        }
        gen.team_tick(boundary, p_task, p_resolve)?;
    }
    Ok(gen.summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rates_emit_nothing() {
        let cfg = ScenarioConfig {
            rates: CategoryRates { health: 0.0, security: 0.0, performance: 0.0 },
            flow_fault_rate: 0.0,
            duration: 600,
            ..Default::default()
        };
        let mut out = Vec::new();
        let summary = run(&cfg, &mut out).unwrap();
        assert!(out.is_empty());
        assert_eq!(summary, RunSummary::default());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut out = Vec::new();
        let cfg = ScenarioConfig { task_probability: 1.5, ..Default::default() };
        assert!(matches!(run(&cfg, &mut out), Err(ScenarioError::Config(_))));
        let cfg = ScenarioConfig {
            rates: CategoryRates { health: -1.0, security: 0.0, performance: 0.0 },
            ..Default::default()
        };
        assert!(matches!(run(&cfg, &mut out), Err(ScenarioError::Config(_))));
        let cfg = ScenarioConfig { asset_count: 3, ..Default::default() };
        assert!(matches!(run(&cfg, &mut out), Err(ScenarioError::Fixture(_))));
    }

    #[test]
    fn summary_counts_match_stream_and_time_is_monotone() {
        let cfg = ScenarioConfig { duration: 1800, ..Default::default() };
        let mut out = Vec::new();
        let summary = run(&cfg, &mut out).unwrap();
        assert_eq!(summary.total() as usize, out.len());
        for kind in [CommandKind::RaiseAlert, CommandKind::TaskAlert, CommandKind::ResolveAlert, CommandKind::ReportFlow] {
            let n = out.iter().filter(|c| c.kind() == kind).count() as u64;
            assert_eq!(summary.by_kind(kind), n, "{kind:?}");
        }
        assert!(out.windows(2).all(|w| w[0].at <= w[1].at));
        assert!(summary.task_alert > 0 && summary.resolve_alert > 0 && summary.report_flow > 0);
    }

    #[test]
    fn sink_errors_propagate() {
        let mut n = 0;
        let mut sink = FnSink(|_c: Command| {
            n += 1;
            if n > 3 { Err("disk full") } else { Ok(()) }
        });
        let err = run(&ScenarioConfig::default(), &mut sink).unwrap_err();
        assert!(matches!(err, ScenarioError::Sink { emitted: 3, .. }), "{err}");
    }
}
