use super::{ControllerState, MotionLimits};
use crate::kinematics::JointVector;

/// Piecewise-constant command held over one integration step.
#[derive(Debug, Clone)]
pub enum Command {
    Jerk(JointVector),
    Accel(JointVector),
}

/// Advance the state by `dt` under a constant command, with exact
/// polynomial integration. Velocity and acceleration are clamped to the
/// limits afterwards; the returned count is the number of clamping events.
pub fn integrate_step(
    state: &ControllerState,
    command: &Command,
    dt: f64,
    limits: &MotionLimits,
) -> (ControllerState, usize) {
    debug_assert!(dt > 0.0);
    let dof = state.dof();
    let mut next = state.clone();
    next.t = state.t + dt;
    match command {
        Command::Jerk(j) => {
            for i in 0..dof {
                next.q[i] = state.q[i]
                    + state.dq[i] * dt
                    + state.ddq[i] * dt * dt / 2.0
                    + j[i] * dt * dt * dt / 6.0;
                next.dq[i] = state.dq[i] + state.ddq[i] * dt + j[i] * dt * dt / 2.0;
                next.ddq[i] = state.ddq[i] + j[i] * dt;
            }
        }
        Command::Accel(a) => {
            for i in 0..dof {
                next.q[i] = state.q[i] + state.dq[i] * dt + a[i] * dt * dt / 2.0;
                next.dq[i] = state.dq[i] + a[i] * dt;
                next.ddq[i] = a[i];
            }
        }
    }
    let mut clamps = 0;
    for i in 0..dof {
        let v = next.dq[i].clamp(-limits.v_max[i], limits.v_max[i]);
        if v != next.dq[i] {
            next.dq[i] = v;
            clamps += 1;
        }
        let a = next.ddq[i].clamp(-limits.a_max[i], limits.a_max[i]);
        if a != next.ddq[i] {
            next.ddq[i] = a;
            clamps += 1;
        }
    }
    (next, clamps)
}
