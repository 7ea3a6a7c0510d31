//! Improve the clearance of a delivery pose by sliding the arm through the
//! position null space while the hand stays put.
//!
//! Usage: cargo run --example adapt_delivery_pose

use std::path::PathBuf;

use nalgebra::{DVector, UnitQuaternion, Vector3};

use handover::adaptation::{user_adapt, AdaptParams};
use handover::geometry::{min_distance, CapsuleSet};
use handover::kinematics::{
    builtin_model, forward_kinematics, inverse_kinematics_restarts, IkParams, Pose,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = builtin_model("fanuc-lrmate-200id7l-like")?;
    let env_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/env/elbow_post.json");
    let env: CapsuleSet = serde_json::from_str(&std::fs::read_to_string(env_path)?)?;

    // A handover pose right next to the bundled shelf post.
    let goal = Pose::new(
        Vector3::new(0.55, -0.20, 0.90),
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2),
    );

    let params = AdaptParams::default();
    let q_raw = inverse_kinematics_restarts(
        &model,
        &goal,
        &DVector::zeros(model.dof()),
        &IkParams::default(),
        20,
        params.rng_seed,
    )?;
    let d_raw = min_distance(&model, &q_raw, &env)?.distance;

    let result = user_adapt(&model, &goal, &env, &params)?;
    let p = forward_kinematics(&model, &result.q_g)?.ee.position;

    println!("raw IK clearance:     {d_raw:.4} m");
    println!("adapted clearance:    {:.4} m", result.clearance);
    println!("orientation penalty:  {:.3} rad", result.orientation_error);
    println!("delivery drift:       {:.2e} m", (p - goal.position).norm());
    println!("iterations:           {}", result.iters_used);
    Ok(())
}
