//! Closed-loop demo of the acceleration-level safe-set filter: a PD
//! controller keeps commanding a goal behind a wall, the filter keeps the
//! link outside the safety margin.
//!
//! Usage: cargo run --example safety_filter_1dof

use nalgebra::{DVector, Point3, Vector3};

use handover::control::{
    integrate_step, pd_acceleration, ssa_filter, Command, ControllerState, MotionLimits,
    SafetyParams,
};
use handover::geometry::{min_distance, Capsule, CapsuleSet};
use handover::kinematics::{JointParams, LinkCapsule, RobotModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // One revolute joint sweeping a 0.7 m link through the xy-plane.
    let model = RobotModel {
        name: "one-dof".into(),
        joints: vec![JointParams {
            alpha: 0.0,
            a: 0.0,
            d: 0.0,
            theta_offset: 0.0,
            q_min: -std::f64::consts::PI,
            q_max: std::f64::consts::PI,
            v_max: 2.0,
            a_max: 6.0,
            j_max: 80.0,
        }],
        link_capsules: vec![LinkCapsule {
            link: 1,
            a: Point3::new(0.1, 0.0, 0.0),
            b: Point3::new(0.8, 0.0, 0.0),
            radius: 0.05,
        }],
        tool: Vector3::new(0.8, 0.0, 0.0),
    };
    // Vertical post at 1.2 rad, dead on the commanded path.
    let mut env = CapsuleSet::new();
    env.push(
        Capsule::new(
            Point3::new(0.7 * 1.2f64.cos(), 0.7 * 1.2f64.sin(), -0.5),
            Point3::new(0.7 * 1.2f64.cos(), 0.7 * 1.2f64.sin(), 0.5),
            0.05,
        ),
        "wall",
    );

    let limits = MotionLimits::from_model(&model);
    let params = SafetyParams::default();
    let goal = DVector::from_vec(vec![1.2]);
    let mut state = ControllerState::at_rest(DVector::zeros(1), 0.0);
    let dt = 1e-3;
    let mut braking = false;
    let mut min_d = f64::INFINITY;
    let mut interventions = 0usize;

    for k in 0..8000 {
        let u_nom = pd_acceleration(&state, &goal, 9.0, 6.0, &limits);
        let out = ssa_filter(&u_nom, &model, &state, &env, &params, &limits, braking)?;
        braking = out.braking;
        interventions += out.intervened as usize;
        let (next, _) = integrate_step(&state, &Command::Accel(out.command), dt, &limits);
        state = next;
        let d = min_distance(&model, &state.q, &env)?.distance;
        min_d = min_d.min(d);
        if k % 1000 == 0 {
            println!(
                "t = {:.1} s  q = {:+.3} rad  clearance = {:.3} m  {}",
                k as f64 * dt,
                state.q[0],
                d,
                if out.intervened { "[filtered]" } else { "" }
            );
        }
    }
    println!("minimum clearance over 8 s: {min_d:.4} m (d_min = {:.2} m)", params.d_min);
    println!("filter interventions: {interventions}");
    Ok(())
}
