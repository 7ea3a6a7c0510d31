use nalgebra::{DMatrix, DVector};

use super::{forward_kinematics, jacobian, position_jacobian, JointVector, Pose, RobotModel};
use crate::error::{Error, Result};

/// Damped-least-squares solver parameters.
#[derive(Debug, Clone)]
pub struct IkParams {
    pub damping: f64,
    /// Per-iteration step norm clamp, rad.
    pub step_clamp: f64,
    pub max_iters: usize,
    pub pos_tol: f64,
    pub ori_tol: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            damping: 1e-3,
            step_clamp: 0.2,
            max_iters: 200,
            pos_tol: 1e-6,
            ori_tol: 1e-6,
        }
    }
}

/// Error-proportional damping: heavy damping while the residual is large
/// keeps steps near singular configurations from oscillating, and decaying
/// toward the configured floor as the residual shrinks removes the damping
/// bias that would otherwise stall convergence just above tolerance.
fn effective_damping(base: f64, residual: f64) -> f64 {
    base.max((0.1 * residual).min(0.1))
}

fn dls_step(j: &DMatrix<f64>, err: &DVector<f64>, base_damping: f64) -> DVector<f64> {
    // dq = J^T (J J^T + damping^2 I)^-1 err
    let damping = effective_damping(base_damping, err.norm());
    let m = j.nrows();
    let jjt = j * j.transpose() + DMatrix::identity(m, m) * damping * damping;
    let chol = jjt
        .cholesky()
        .expect("J J^T + damping^2 I is positive definite");
    j.transpose() * chol.solve(err)
}

fn pose_error(current: &Pose, target: &Pose) -> DVector<f64> {
    let dp = target.position - current.position;
    let dw = (target.orientation * current.orientation.inverse()).scaled_axis();
    DVector::from_vec(vec![dp.x, dp.y, dp.z, dw.x, dw.y, dw.z])
}

/// Damped-least-squares inverse kinematics for the full 6D pose.
///
/// The result is clamped to joint limits every iteration; convergence
/// requires both position and orientation residuals under tolerance.
pub fn inverse_kinematics(
    model: &RobotModel,
    target: &Pose,
    q_seed: &JointVector,
    params: &IkParams,
) -> Result<JointVector> {
    model.check_dimension(q_seed)?;
    let mut q = q_seed.clone();
    model.clamp_to_limits(&mut q);
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iters {
        let fk = forward_kinematics(model, &q)?;
        let err = pose_error(&fk.ee, target);
        let pos_err = err.rows(0, 3).norm();
        let ori_err = fk.ee.orientation_error(target);
        if pos_err <= params.pos_tol && ori_err <= params.ori_tol {
            return Ok(q);
        }
        residual = pos_err + ori_err;
        let j = jacobian(model, &q)?;
        let mut dq = dls_step(&j, &err, params.damping);
        let n = dq.norm();
        if n > params.step_clamp {
            dq *= params.step_clamp / n;
        }
        q += dq;
        model.clamp_to_limits(&mut q);
    }
    Err(Error::NoConvergence {
        iterations: params.max_iters,
        residual,
    })
}

/// [`inverse_kinematics`] with deterministic seed restarts.
///
/// Damped least squares is a local method; a seed in the wrong wrist basin
/// can stall. This tries the caller's seed first, then the zero
/// configuration, then uniformly random in-limit configurations from a
/// fixed-seed generator, and returns the first converged solution.
pub fn inverse_kinematics_restarts(
    model: &RobotModel,
    target: &Pose,
    q_seed: &JointVector,
    params: &IkParams,
    restarts: usize,
    rng_seed: u64,
) -> Result<JointVector> {
    use rand::{Rng, SeedableRng};
    let mut last = inverse_kinematics(model, target, q_seed, params);
    if last.is_ok() {
        return last;
    }
    let zeros = DVector::zeros(model.dof());
    if &zeros != q_seed {
        last = inverse_kinematics(model, target, &zeros, params);
        if last.is_ok() {
            return last;
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..restarts {
        let seed = DVector::from_fn(model.dof(), |i, _| {
            rng.gen_range(model.joints[i].q_min..=model.joints[i].q_max)
        });
        last = inverse_kinematics(model, target, &seed, params);
        if last.is_ok() {
            return last;
        }
    }
    last
}

/// Position-only correction: restore `FK_position(q) = p_target` with a
/// locally minimal joint-space adjustment from `q`.
pub fn icop_correct(
    model: &RobotModel,
    q: &JointVector,
    p_target: &nalgebra::Vector3<f64>,
    params: &IkParams,
) -> Result<JointVector> {
    model.check_dimension(q)?;
    let mut q = q.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iters {
        let fk = forward_kinematics(model, &q)?;
        let dp = p_target - fk.ee.position;
        residual = dp.norm();
        if residual <= params.pos_tol {
            return Ok(q);
        }
        let jp = position_jacobian(model, &q)?;
        let err = DVector::from_vec(vec![dp.x, dp.y, dp.z]);
        let mut dq = dls_step(&jp, &err, params.damping);
        let n = dq.norm();
        if n > params.step_clamp {
            dq *= params.step_clamp / n;
        }
        q += dq;
        model.clamp_to_limits(&mut q);
    }
    Err(Error::NoConvergence {
        iterations: params.max_iters,
        residual,
    })
}
