//! Deterministic multi-rate closed-loop simulation.

mod engine;
mod runlog;
mod scenario;

pub use engine::run_scenario;
pub use runlog::{compare_runs, DivergenceReport, GoalRecord, LogRow, RunLog, StageSpan, Summary};
pub use scenario::{Pipeline, Rates, ScenarioConfig, TrackingParams};
