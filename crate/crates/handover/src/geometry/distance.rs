use nalgebra::DVector;

use super::{capsule_distance, Capsule, CapsuleSet};
use crate::error::Result;
use crate::kinematics::{forward_kinematics, JointVector, RobotModel};

/// Minimum robot-environment clearance and the pair realizing it.
#[derive(Debug, Clone, Copy)]
pub struct MinDistance {
    pub distance: f64,
    /// Index into the robot's `link_capsules`.
    pub robot_capsule: usize,
    /// Index into the environment capsule set.
    pub env_capsule: usize,
}

/// Place the model's link capsules in the world using forward kinematics.
pub fn placed_robot_capsules(model: &RobotModel, q: &JointVector) -> Result<Vec<Capsule>> {
    let fk = forward_kinematics(model, q)?;
    Ok(model
        .link_capsules
        .iter()
        .map(|c| {
            let t = &fk.frames[c.link];
            Capsule::new(t * c.a, t * c.b, c.radius)
        })
        .collect())
}

/// Minimum clearance between any robot link capsule and any environment
/// capsule. Ties break to the lowest link capsule index, then the lowest
/// environment index (the scan order).
pub fn min_distance(model: &RobotModel, q: &JointVector, env: &CapsuleSet) -> Result<MinDistance> {
    debug_assert!(!env.is_empty(), "environment capsule set must be non-empty");
    let robot = placed_robot_capsules(model, q)?;
    let mut best = MinDistance {
        distance: f64::INFINITY,
        robot_capsule: 0,
        env_capsule: 0,
    };
    for (ri, rc) in robot.iter().enumerate() {
        for (ei, ec) in env.capsules.iter().enumerate() {
            let d = capsule_distance(rc, ec);
            if d < best.distance {
                best = MinDistance {
                    distance: d,
                    robot_capsule: ri,
                    env_capsule: ei,
                };
            }
        }
    }
    Ok(best)
}

/// Finite-difference step for the clearance gradient, rad.
const GRAD_STEP: f64 = 1e-6;

/// Joint-space gradient of the minimum clearance.
///
/// Differentiates the clearance of the pair active at `q` (central
/// differences), so at pair-switch discontinuities this is the one-sided
/// subgradient of the active pair.
pub fn distance_gradient(
    model: &RobotModel,
    q: &JointVector,
    env: &CapsuleSet,
) -> Result<DVector<f64>> {
    let active = min_distance(model, q, env)?;
    let link_capsule = &model.link_capsules[active.robot_capsule];
    let env_capsule = &env.capsules[active.env_capsule];

    let pair_distance = |q: &JointVector| -> Result<f64> {
        let fk = forward_kinematics(model, q)?;
        let t = &fk.frames[link_capsule.link];
        let placed = Capsule::new(t * link_capsule.a, t * link_capsule.b, link_capsule.radius);
        Ok(capsule_distance(&placed, env_capsule))
    };

    let mut grad = DVector::zeros(model.dof());
    let mut qp = q.clone();
    for i in 0..model.dof() {
        let q0 = q[i];
        qp[i] = q0 + GRAD_STEP;
        let dp = pair_distance(&qp)?;
        qp[i] = q0 - GRAD_STEP;
        let dm = pair_distance(&qp)?;
        qp[i] = q0;
        grad[i] = (dp - dm) / (2.0 * GRAD_STEP);
    }
    Ok(grad)
}
