//! Deterministic scenario generation: the fixture topology, the reference
//! Boston command log and seeded telemetry runs.

pub mod boston;
pub mod fixture;
pub mod rng;
pub mod scenario;

pub use boston::{make_boston_fixture, BOSTON_START_MS};
pub use fixture::{generate_fixture, FixtureError, BIG_ENTERPRISE_ASSETS};
pub use rng::SimRng;
pub use scenario::{run, run_on, CategoryRates, CommandSink, RunSummary, ScenarioConfig, ScenarioError};
