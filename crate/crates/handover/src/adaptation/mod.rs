//! Delivery-pose adaptation: null-space search that maximizes human
//! clearance while keeping the delivery position fixed and regularizing
//! orientation deviation.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_distance, CapsuleSet};
use crate::kinematics::{
    forward_kinematics, icop_correct, inverse_kinematics_restarts, position_null_space, IkParams,
    JointVector, Pose, RobotModel,
};

/// Parameters of the null-space perturbation search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptParams {
    /// Perturbation step size, rad.
    pub alpha: f64,
    /// Orientation-deviation weight.
    pub lambda_omega: f64,
    pub max_iters: usize,
    pub rng_seed: u64,
}

impl Default for AdaptParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            // 1 rad of orientation deviation trades against 10 cm of
            // clearance.
            lambda_omega: 0.1,
            max_iters: 300,
            rng_seed: 0,
        }
    }
}

/// Outcome of the adaptation search.
#[derive(Debug, Clone)]
pub struct AdaptResult {
    /// Adapted joint goal; end-effector position matches the seed's.
    pub q_g: JointVector,
    /// Final objective value `-d + lambda_omega * |e_omega|`.
    pub objective: f64,
    /// Human clearance at `q_g`, m.
    pub clearance: f64,
    /// Orientation deviation from the seed configuration, rad.
    pub orientation_error: f64,
    pub iters_used: usize,
    /// True when the position Jacobian had no null space and the seed was
    /// returned unchanged.
    pub no_null_space: bool,
}

/// Adaptation objective at `q`: negative clearance plus weighted
/// orientation deviation from the reference configuration `q_ref`.
pub fn objective(
    model: &RobotModel,
    q: &JointVector,
    env: &CapsuleSet,
    q_ref: &JointVector,
    lambda_omega: f64,
) -> Result<(f64, f64, f64)> {
    let d = min_distance(model, q, env)?.distance;
    let fk_q = forward_kinematics(model, q)?;
    let fk_ref = forward_kinematics(model, q_ref)?;
    let e_omega = fk_q.ee.orientation_error(&fk_ref.ee);
    Ok((-d + lambda_omega * e_omega, d, e_omega))
}

/// Null-space delivery-pose adaptation.
///
/// Seeds with `q_G = IK(x_G)`, then repeatedly perturbs along a random
/// direction in the position null space, restores the delivery position,
/// and keeps the candidate when the objective improves. The returned goal
/// always satisfies the hard position constraint and never scores worse
/// than the seed.
pub fn user_adapt(
    model: &RobotModel,
    x_g: &Pose,
    env: &CapsuleSet,
    params: &AdaptParams,
) -> Result<AdaptResult> {
    let ik_params = IkParams::default();
    let dof = model.dof();
    let seed_q = inverse_kinematics_restarts(
        model,
        x_g,
        &DVector::zeros(dof),
        &ik_params,
        20,
        params.rng_seed,
    )
    .map_err(|e| Error::IkFailed(e.to_string()))?;
    user_adapt_from(model, &seed_q, env, params)
}

/// Same search, but starting from an already-solved joint goal.
pub fn user_adapt_from(
    model: &RobotModel,
    q_seed: &JointVector,
    env: &CapsuleSet,
    params: &AdaptParams,
) -> Result<AdaptResult> {
    let mut search = Search {
        model,
        env,
        q_seed,
        params,
        ik_params: IkParams::default(),
        p_g: forward_kinematics(model, q_seed)?.ee.position,
        // Seed the bookkeeping with the seed's own score rather than
        // infinity, so the returned solution can never be worse than the
        // seed.
        best: objective(model, q_seed, env, q_seed, params.lambda_omega)?,
        best_q: q_seed.clone(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut iters_used = 0;
    let mut no_null_space = false;

    for _ in 0..params.max_iters {
        iters_used += 1;
        let basis = position_null_space(model, &search.best_q)?;
        if basis.is_empty() {
            no_null_space = true;
            break;
        }
        // Random unit direction in the span of the null-space basis.
        let mut dq = DVector::zeros(model.dof());
        for v in &basis {
            let c: f64 = rng.gen_range(-1.0..1.0);
            dq += v * c;
        }
        let n = dq.norm();
        if n < 1e-12 {
            continue;
        }
        dq /= n;

        // Hill climb: walk this direction (or its negation) while it keeps
        // improving, then revert to the best-so-far. Reverting (rather than
        // wandering on) keeps the orientation term from drifting without
        // paying for itself in clearance.
        if !search.walk(&dq)? {
            search.walk(&(-dq))?;
        }
    }

    let (best_v, best_d, best_e) = search.best;
    Ok(AdaptResult {
        q_g: search.best_q,
        objective: best_v,
        clearance: best_d,
        orientation_error: best_e,
        iters_used,
        no_null_space,
    })
}

struct Search<'a> {
    model: &'a RobotModel,
    env: &'a CapsuleSet,
    q_seed: &'a JointVector,
    params: &'a AdaptParams,
    ik_params: IkParams,
    p_g: nalgebra::Vector3<f64>,
    /// Best `(objective, clearance, orientation error)` so far.
    best: (f64, f64, f64),
    best_q: JointVector,
}

impl Search<'_> {
    /// Step along `dq` from the best configuration while the objective
    /// improves; returns whether any step was accepted.
    fn walk(&mut self, dq: &JointVector) -> Result<bool> {
        let mut improved = false;
        loop {
            let candidate = &self.best_q + dq * self.params.alpha;
            if !self.model.within_position_limits(&candidate) {
                return Ok(improved);
            }
            let corrected = match icop_correct(self.model, &candidate, &self.p_g, &self.ik_params)
            {
                Ok(c) => c,
                Err(_) => return Ok(improved),
            };
            if !self.model.within_position_limits(&corrected) {
                return Ok(improved);
            }
            let score = objective(
                self.model,
                &corrected,
                self.env,
                self.q_seed,
                self.params.lambda_omega,
            )?;
            if score.0 >= self.best.0 {
                return Ok(improved);
            }
            self.best = score;
            self.best_q = corrected;
            improved = true;
        }
    }
}
