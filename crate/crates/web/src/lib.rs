//! Browser demo: a local board seeded with the Boston picture. The page
//! can toggle missions, highlight assets with a query and step a seeded
//! scenario forward; every change goes through the same sequencer the
//! server runs, so rejections read the same as they would over the wire.

use std::sync::Arc;

use bigboard_core::command::{ClientIdentity, Command, CommandBody};
use bigboard_core::ids::{MissionId, QueryId};
use bigboard_core::overlay::MAX_ACTIVE_QUERIES;
use bigboard_core::query::{evaluate_query, QueryExpr};
use bigboard_core::render::{render_svg, render_text, SvgOptions};
use bigboard_core::sequencer::{Outcome, Sequencer};
use bigboard_core::sim::{
    generate_fixture, make_boston_fixture, run_on, ScenarioConfig, BIG_ENTERPRISE_ASSETS, BOSTON_START_MS,
};
use wasm_bindgen::prelude::*;

const WINDOW: usize = 12;

#[wasm_bindgen]
pub struct BoardDemo {
    seq: Sequencer,
    /// Precomputed scenario, fed in by `step`.
    stream: Vec<Command>,
    cursor: usize,
    tick: u64,
    issued: u64,
    queries: u32,
}

#[wasm_bindgen]
impl BoardDemo {
    /// Boston fixture replayed, plus two simulated hours queued from `seed`.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<BoardDemo, String> {
        let topology = Arc::new(generate_fixture(BIG_ENTERPRISE_ASSETS).map_err(|e| e.to_string())?);
        let mut seq = Sequencer::new(Arc::clone(&topology));
        for cmd in make_boston_fixture() {
            seq.submit(cmd).map_err(|e| e.to_string())?;
        }
        let cfg = ScenarioConfig {
            seed: seed as u64,
            duration: 2 * 3600,
            start_ms: BOSTON_START_MS + 60_000,
            ..Default::default()
        };
        let mut stream = Vec::new();
        run_on(&cfg, &topology, &mut stream).map_err(|e| e.to_string())?;
        Ok(BoardDemo { seq, stream, cursor: 0, tick: 0, issued: 0, queries: 0 })
    }

    pub fn svg(&self) -> String {
        render_svg(self.seq.state(), SvgOptions { tick: self.tick, window_size: WINDOW, now_ms: None })
    }

    pub fn text(&self) -> String {
        render_text(self.seq.state(), self.seq.seq())
    }

    pub fn seq(&self) -> f64 {
        self.seq.seq() as f64
    }

    pub fn live_alerts(&self) -> u32 {
        self.seq.state().alerts().live_count() as u32
    }

    pub fn missions(&self) -> Vec<String> {
        self.seq.state().topology().missions().iter().map(|m| m.id.to_string()).collect()
    }

    /// Activates the mission if inactive, otherwise deactivates it.
    pub fn toggle_mission(&mut self, mission_id: &str) -> Result<bool, String> {
        let id = MissionId::from(mission_id);
        let on = !self.seq.state().missions().active().contains(&id);
        let body = if on {
            CommandBody::ActivateMission { mission_id: id }
        } else {
            CommandBody::DeactivateMission { mission_id: id }
        };
        self.manager(body)?;
        Ok(on)
    }

    /// Saves `expression` as a new query and turns it on. Returns how many
    /// assets it matched. Past the active cap the oldest query goes off.
    pub fn highlight(&mut self, expression: &str) -> Result<u32, String> {
        let expr: QueryExpr = expression.parse().map_err(|e| format!("{e}"))?;
        let hits = evaluate_query(&expr, self.seq.state().topology()).len() as u32;
        let active: Vec<QueryId> = self.seq.state().queries().active().to_vec();
        if active.len() >= MAX_ACTIVE_QUERIES {
            self.manager(CommandBody::DeactivateQuery { query_id: active[0].clone() })?;
        }
        self.queries += 1;
        let query_id = QueryId::from(format!("q{}", self.queries));
        // coprime stride, so hues do not repeat for 360 queries
        let color = format!("hsl({},70%,55%)", (self.queries * 47) % 360);
        self.manager(CommandBody::SaveQuery {
            query_id: query_id.clone(),
            label: expression.to_string(),
            expression: expr,
            color,
        })?;
        self.manager(CommandBody::ActivateQuery { query_id })?;
        Ok(hits)
    }

    /// Applies the next `n` scenario commands and advances the menu scroll.
    /// Returns how many were applied; zero once the scenario is spent.
    pub fn step(&mut self, n: u32) -> u32 {
        let end = (self.cursor + n as usize).min(self.stream.len());
        let applied = end - self.cursor;
        for cmd in &self.stream[self.cursor..end] {
            // a poisoned sequencer needs a journal, and this one has none
            let _ = self.seq.submit(cmd.clone());
        }
        self.cursor = end;
        self.tick += 1;
        applied as u32
    }
}

impl BoardDemo {
    pub fn sequencer(&self) -> &Sequencer {
        &self.seq
    }

    fn manager(&mut self, body: CommandBody) -> Result<(), String> {
        self.issued += 1;
        let cmd = Command::new(format!("web-{}", self.issued), ClientIdentity::manager("web"), 0, body);
        match self.seq.submit(cmd).map_err(|e| e.to_string())? {
            Outcome::Accepted { .. } => Ok(()),
            Outcome::Rejected { reason } => Err(reason.to_string()),
        }
    }
}
