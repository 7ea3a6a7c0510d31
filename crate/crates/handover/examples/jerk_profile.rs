//! Plan a jerk-bounded rest-to-rest move and print a decimated profile
//! table (paste into any plotting tool).
//!
//! Usage: cargo run --example jerk_profile

use nalgebra::DVector;

use handover::control::{jpc_plan, ControllerState, MotionLimits};
use handover::kinematics::builtin_model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = builtin_model("kinova-gen3-like")?;
    let limits = MotionLimits::from_model(&model);

    let start = ControllerState::at_rest(DVector::zeros(model.dof()), 0.0);
    let mut goal = DVector::zeros(model.dof());
    goal[0] = 1.2;
    goal[1] = -0.7;
    goal[3] = 0.4;

    let plan = jpc_plan(&start, &goal, &limits, 125.0)?;
    println!("# duration = {:.4} s, {} samples", plan.duration, plan.sample_count());
    println!("# t\tq0\tdq0\tddq0\tjerk0");
    for (k, s) in plan.samples().iter().enumerate() {
        if k % 12 == 0 {
            println!("{:.3}\t{:+.4}\t{:+.4}\t{:+.4}\t{:+.4}", s.t, s.q[0], s.dq[0], s.ddq[0], s.jerk[0]);
        }
    }
    Ok(())
}
