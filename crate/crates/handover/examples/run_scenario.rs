//! Run a bundled handover scenario end to end and print its summary.
//!
//! Usage: cargo run --example run_scenario [scenario-name]

use std::path::PathBuf;

use handover::sim::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fanuc-bright-near".into());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/scenarios")
        .join(format!("{name}.toml"));

    let cfg = ScenarioConfig::load(&path)?;
    println!("scenario: {} ({:?} pipeline, {:.0} s)", cfg.name, cfg.pipeline, cfg.duration);

    let log = run_scenario(&cfg)?;
    let summary = log.summary();
    println!("complete:        {}", summary.complete);
    println!("min distance:    {:.4} m (margin d_min = {:.2} m)", summary.min_distance, cfg.safety.d_min);
    println!("tracking error:  {:.5} rad", summary.max_tracking_error);
    println!("interventions:   {}", summary.filter_interventions);
    println!("stages:");
    for s in &summary.stages {
        println!("  {:<10} {:6.2} s -> {:6.2} s", s.stage, s.t_start, s.t_end);
    }
    Ok(())
}
