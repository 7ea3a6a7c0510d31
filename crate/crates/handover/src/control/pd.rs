use super::{ControllerState, MotionLimits};
use crate::kinematics::JointVector;

/// PD tracking law: `u = kp (q_ref - q) - kd dq`, clamped to the
/// acceleration limits componentwise.
pub fn pd_acceleration(
    state: &ControllerState,
    q_ref: &JointVector,
    kp: f64,
    kd: f64,
    limits: &MotionLimits,
) -> JointVector {
    let mut u = (q_ref - &state.q) * kp - &state.dq * kd;
    for i in 0..u.len() {
        u[i] = u[i].clamp(-limits.a_max[i], limits.a_max[i]);
    }
    u
}
