//! Build the capsule envelope of a detected human and measure the robot's
//! clearance to it in its home configuration.
//!
//! Usage: cargo run --example human_envelope

use std::path::PathBuf;

use nalgebra::DVector;

use handover::geometry::min_distance;
use handover::kinematics::builtin_model;
use handover::perception::{average_frames, human_capsules, load_skeleton_trajectory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/skeletons/bright_near.jsonl");
    let frames = load_skeleton_trajectory(&path)?;
    let smoothed = average_frames(&frames[..2.min(frames.len())]).ok_or("no frames")?;
    let envelope = human_capsules(&smoothed)?;

    println!("{} capsules from {} keypoints:", envelope.len(), smoothed.keypoints.len());
    for (capsule, label) in envelope.capsules.iter().zip(&envelope.labels) {
        println!("  {:<16} r = {:.2} m, length = {:.2} m", label, capsule.r, (capsule.b - capsule.a).norm());
    }

    let model = builtin_model("fanuc-lrmate-200id7l-like")?;
    let home = DVector::from_vec(vec![0.0, 0.3, -0.3, 0.0, -0.6, 0.0]);
    let gap = min_distance(&model, &home, &envelope)?;
    println!(
        "robot at home: {:.3} m between robot capsule {} and {}",
        gap.distance, gap.robot_capsule, envelope.labels[gap.env_capsule]
    );
    Ok(())
}
