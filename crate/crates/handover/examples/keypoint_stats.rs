//! Compare detection noise across the bundled lighting conditions and show
//! how it pushes the delivery goal away from the human.
//!
//! Usage: cargo run --example keypoint_stats

use std::path::PathBuf;

use nalgebra::{UnitQuaternion, Vector3};

use handover::kinematics::Pose;
use handover::perception::{
    adapt_goal, keypoint_stats, load_skeleton_trajectory, GoalAdaptParams, Keypoint,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/skeletons");
    let params = GoalAdaptParams {
        lambda: Vector3::new(1.0, 1.0, 1.0),
        u_safe: Vector3::new(-1.0, 0.0, 0.0), // away from the human, toward the robot
    };

    for name in ["bright_near", "dark_near"] {
        let frames = load_skeleton_trajectory(&data.join(format!("{name}.jsonl")))?;
        let (estimate, mean) = keypoint_stats(&frames, Keypoint::RightWrist, 30)?;
        let nominal = Pose::new(mean + Vector3::new(-0.35, 0.0, 0.0), UnitQuaternion::identity());
        let adapted = adapt_goal(&nominal, &estimate, &params);
        let offset = (adapted.position - nominal.position).norm();
        println!("{name}:");
        println!("  sigma   = [{:.4}, {:.4}, {:.4}] m", estimate.sigma.x, estimate.sigma.y, estimate.sigma.z);
        println!("  goal pushed {:.1} mm away from the wrist", offset * 1000.0);
    }
    Ok(())
}
