use nalgebra::DVector;

use super::{ControllerState, MotionLimits, SafetyParams};
use crate::error::{Error, Result};
use crate::geometry::{distance_gradient, min_distance, CapsuleSet};
use crate::kinematics::{JointVector, RobotModel};

/// Horizon used to finite-difference the clearance's second derivative, s.
const DDOT_STEP: f64 = 1e-4;
/// Constraint rows with squared norm below this count as degenerate.
const ROW_EPS: f64 = 1e-12;

/// Which derivative level the safety index (and its filter) acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyOrder {
    Accel,
    Jerk,
}

/// Safety index value plus the gradient data the filters need.
#[derive(Debug, Clone)]
pub struct SafetyIndex {
    /// Index value; positive flags an unsafe tendency.
    pub phi: f64,
    /// Current clearance, m.
    pub d: f64,
    /// Clearance rate along the current velocity, m/s.
    pub d_dot: f64,
    /// Clearance second derivative estimate (jerk order only), m/s^2.
    pub d_ddot: f64,
    /// Joint-space clearance gradient.
    pub grad: DVector<f64>,
}

/// Evaluate the safety index.
///
/// Acceleration order: `phi = d_min - d - k_v * d_dot`.
/// Jerk order additionally subtracts `k_a * d_ddot`, with `d_ddot`
/// finite-differenced along the current motion.
pub fn safety_index(
    model: &RobotModel,
    state: &ControllerState,
    env: &CapsuleSet,
    params: &SafetyParams,
    order: SafetyOrder,
) -> Result<SafetyIndex> {
    let d = min_distance(model, &state.q, env)?.distance;
    let grad = distance_gradient(model, &state.q, env)?;
    let d_dot = grad.dot(&state.dq);
    let mut phi = params.d_min - d - params.k_v * d_dot;
    let mut d_ddot = 0.0;
    if order == SafetyOrder::Jerk {
        let eps = DDOT_STEP;
        let q_next = &state.q + &state.dq * eps + &state.ddq * (eps * eps / 2.0);
        let dq_next = &state.dq + &state.ddq * eps;
        let grad_next = distance_gradient(model, &q_next, env)?;
        let d_dot_next = grad_next.dot(&dq_next);
        d_ddot = (d_dot_next - d_dot) / eps;
        phi -= params.k_a * d_ddot;
    }
    Ok(SafetyIndex {
        phi,
        d,
        d_dot,
        d_ddot,
        grad,
    })
}

/// A filtered command plus whether the filter had to modify it.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub command: JointVector,
    pub intervened: bool,
    pub phi: f64,
    /// True while the braking speed cap is active. Feed this back as the
    /// `braking` argument of the next filter call: the cap releases only
    /// once the approach rate has dropped well below the trigger, so a
    /// stiff tracking loop cannot chatter the brake off one step at a time.
    pub braking: bool,
}

/// Hysteresis: once braking, keep braking until the approach rate falls
/// below this fraction of the cap.
const BRAKE_RELEASE: f64 = 0.8;

/// Standoff added above `d_min` when budgeting braking distance, m. The
/// capped approach converges to `d_min + CAP_BUFFER`, keeping the margin
/// itself clear of discretization noise.
const CAP_BUFFER: f64 = 0.02;

/// Largest safe approach rate `-d_dot` for the current clearance.
///
/// The index constraint only shapes the derivative of `phi`; nothing in it
/// guarantees the actuators can actually bleed off the approach momentum
/// inside the remaining clearance, so a fast approach can coast through the
/// margin. This cap closes that hole with a braking-distance bound: the
/// approach rate may not exceed the speed a maximum-deceleration stop
/// (de-rated by `brake_margin`) can absorb within `d - d_min`. At jerk
/// order the deceleration also needs `a_max / j_max` seconds to build,
/// which shortens the usable distance by `v * t_ramp`.
pub fn approach_speed_cap(
    idx: &SafetyIndex,
    params: &SafetyParams,
    limits: &MotionLimits,
    order: SafetyOrder,
) -> f64 {
    let s = idx.d - params.d_min - CAP_BUFFER;
    if s <= 0.0 {
        return 0.0;
    }
    // Deceleration of the clearance achievable with the joint acceleration
    // limits, de-rated for curvature and discretization.
    let mut a_cap = 0.0;
    for i in 0..idx.grad.len() {
        a_cap += idx.grad[i].abs() * limits.a_max[i];
    }
    a_cap *= params.brake_margin;
    if a_cap <= 0.0 {
        return 0.0;
    }
    match order {
        SafetyOrder::Accel => (2.0 * a_cap * s).sqrt(),
        SafetyOrder::Jerk => {
            // Solve v^2 / (2 a) + v t_r = s for v.
            let t_r = (0..limits.dof())
                .map(|i| limits.a_max[i] / limits.j_max[i])
                .fold(0.0, f64::max);
            a_cap * (-t_r + (t_r * t_r + 2.0 * s / a_cap).sqrt())
        }
    }
}

/// Minimum-norm projection of `nominal` onto the halfspace `row . u <= rhs`,
/// identity when already inside.
fn project(nominal: &JointVector, row: &DVector<f64>, rhs: f64) -> Result<(JointVector, bool)> {
    let lhs = row.dot(nominal);
    if lhs <= rhs {
        return Ok((nominal.clone(), false));
    }
    let nn = row.norm_squared();
    if nn < ROW_EPS {
        return Err(Error::InfeasibleSafeControl);
    }
    Ok((nominal - row * ((lhs - rhs) / nn), true))
}

/// Acceleration-level safe-set filter.
///
/// Off the boundary (`phi < 0`) the nominal command passes through
/// unmodified. Otherwise the command is projected onto the linear
/// constraint `(dphi/ddq) . u <= -eta phi - (dphi/dq) . dq` and clamped to
/// the acceleration limits. The clearance gradient stands in for `dphi/dq`;
/// higher-order curvature terms are dropped.
pub fn ssa_filter(
    u_nom: &JointVector,
    model: &RobotModel,
    state: &ControllerState,
    env: &CapsuleSet,
    params: &SafetyParams,
    limits: &MotionLimits,
    braking: bool,
) -> Result<FilterOutcome> {
    let idx = safety_index(model, state, env, params, SafetyOrder::Accel)?;
    let cap = approach_speed_cap(&idx, params, limits, SafetyOrder::Accel);
    let trigger = if braking { BRAKE_RELEASE * cap } else { cap };
    if idx.d_dot < -trigger {
        // Approaching faster than the remaining clearance can absorb:
        // accelerate along the clearance gradient at the joint limits. This
        // is the fastest box-constrained way to raise d_dot, and unlike a
        // full stop it leaves motion tangential to the obstacle alone, so
        // the robot can keep sliding around it.
        let mut u = DVector::zeros(state.dof());
        for i in 0..u.len() {
            if idx.grad[i].abs() > ROW_EPS {
                u[i] = idx.grad[i].signum() * limits.a_max[i];
            }
        }
        return Ok(FilterOutcome {
            command: u,
            intervened: true,
            phi: idx.phi,
            braking: true,
        });
    }
    if idx.phi < 0.0 {
        return Ok(FilterOutcome {
            command: u_nom.clone(),
            intervened: false,
            phi: idx.phi,
            braking: false,
        });
    }
    // phi_dot = (dphi/dq) . dq + (dphi/ddq) . u with dphi/dq ~ -grad,
    // dphi/ddq = -k_v grad; require phi_dot <= -eta phi.
    let row = &idx.grad * (-params.k_v);
    let rhs = -params.eta * idx.phi + idx.grad.dot(&state.dq);
    let (mut u, intervened) = project(u_nom, &row, rhs)?;
    for i in 0..u.len() {
        u[i] = u[i].clamp(-limits.a_max[i], limits.a_max[i]);
    }
    Ok(FilterOutcome {
        command: u,
        intervened,
        phi: idx.phi,
        braking: false,
    })
}

/// Jerk-level safe-set filter: the same structure one derivative higher.
pub fn jssa_filter(
    j_nom: &JointVector,
    model: &RobotModel,
    state: &ControllerState,
    env: &CapsuleSet,
    params: &SafetyParams,
    limits: &MotionLimits,
    braking: bool,
) -> Result<FilterOutcome> {
    let idx = safety_index(model, state, env, params, SafetyOrder::Jerk)?;
    let cap = approach_speed_cap(&idx, params, limits, SafetyOrder::Jerk);
    let trigger = if braking { BRAKE_RELEASE * cap } else { cap };
    // At jerk order the braking deceleration takes a_max / j_max seconds to
    // build, so compare the approach rate the current closing acceleration
    // will have produced by then, not the instantaneous one — otherwise the
    // speed committed during the ramp blows through the cap.
    let t_ramp = (0..limits.dof())
        .map(|i| limits.a_max[i] / limits.j_max[i])
        .fold(0.0, f64::max);
    let d_dot_pred = idx.d_dot + t_ramp * idx.d_ddot.min(0.0);
    if d_dot_pred < -trigger {
        // Too fast for the remaining clearance: drive each joint's
        // acceleration toward the gradient-aligned braking value at the
        // jerk limit (see the acceleration-order branch for why gradient
        // aligned rather than a full stop).
        let mut j = DVector::zeros(state.dof());
        for i in 0..j.len() {
            let a_target = if idx.grad[i].abs() > ROW_EPS {
                idx.grad[i].signum() * limits.a_max[i]
            } else {
                0.0
            };
            let gap = a_target - state.ddq[i];
            if gap.abs() > ROW_EPS {
                j[i] = gap.signum() * limits.j_max[i];
            }
        }
        return Ok(FilterOutcome {
            command: j,
            intervened: true,
            phi: idx.phi,
            braking: true,
        });
    }
    if idx.phi < 0.0 {
        return Ok(FilterOutcome {
            command: j_nom.clone(),
            intervened: false,
            phi: idx.phi,
            braking: false,
        });
    }
    // phi_dot = (dphi/dq) . dq + (dphi/ddq) . ddq + (dphi/dddq) . j with
    // dphi/dq ~ -grad, dphi/ddq ~ -k_v grad, dphi/dddq = -k_a grad.
    let row = &idx.grad * (-params.k_a);
    let rhs = -params.eta * idx.phi
        + idx.grad.dot(&state.dq)
        + params.k_v * idx.grad.dot(&state.ddq);
    let (mut j, intervened) = project(j_nom, &row, rhs)?;
    for i in 0..j.len() {
        j[i] = j[i].clamp(-limits.j_max[i], limits.j_max[i]);
    }
    Ok(FilterOutcome {
        command: j,
        intervened,
        phi: idx.phi,
        braking: false,
    })
}
