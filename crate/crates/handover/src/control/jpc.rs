use nalgebra::DVector;

use super::{ControllerState, MotionLimits};
use crate::error::{Error, Result};
use crate::kinematics::JointVector;

/// Displacements below this are treated as already at the goal, rad.
const GOAL_EPS: f64 = 1e-12;
/// Velocities/accelerations below this count as rest.
const REST_EPS: f64 = 1e-12;

/// One analytic sample of a [`JerkPlan`].
#[derive(Debug, Clone)]
pub struct PlanSample {
    pub t: f64,
    pub q: JointVector,
    pub dq: JointVector,
    pub ddq: JointVector,
    pub jerk: JointVector,
}

/// Jerk-bounded position plan: per-joint piecewise-constant jerk segments,
/// time-synchronized so every joint comes to rest at the goal at the same
/// instant. Sampled positions are the exact triple integral of the segment
/// jerks.
#[derive(Debug, Clone)]
pub struct JerkPlan {
    pub dt: f64,
    /// Plan start time (copied from the seeding state).
    pub t0: f64,
    pub q_goal: JointVector,
    pub duration: f64,
    start: ControllerState,
    /// Per joint: (duration s, jerk rad/s^3) segments.
    segments: Vec<Vec<(f64, f64)>>,
}

impl JerkPlan {
    /// Number of command samples, including the initial one.
    pub fn sample_count(&self) -> usize {
        if self.duration <= 0.0 {
            1
        } else {
            (self.duration / self.dt - 1e-9).ceil() as usize + 1
        }
    }

    /// Jerk held over the sample period starting at plan-relative `t`.
    ///
    /// This is the average jerk over `[t, t + dt)` — the finite difference
    /// of the plan acceleration — not the instantaneous segment jerk.
    /// Holding it constant for one period reproduces the plan acceleration
    /// exactly at every sample boundary, so zero-order-hold execution does
    /// not drift when a segment switch falls inside a period. Magnitudes
    /// never exceed the segment jerks in the period, so joint limits still
    /// hold.
    pub fn jerk_at(&self, t: f64) -> JointVector {
        let (_, _, a0) = self.state_at(t);
        let (_, _, a1) = self.state_at(t + self.dt);
        (a1 - a0) / self.dt
    }

    /// Analytic state at plan-relative time `t` (clamped to the duration).
    pub fn state_at(&self, t: f64) -> (JointVector, JointVector, JointVector) {
        let t = t.clamp(0.0, self.duration);
        let dof = self.q_goal.len();
        let mut q = DVector::zeros(dof);
        let mut dq = DVector::zeros(dof);
        let mut ddq = DVector::zeros(dof);
        for i in 0..dof {
            let (mut qi, mut vi, mut ai) = (self.start.q[i], self.start.dq[i], self.start.ddq[i]);
            let mut rem = t;
            for &(dur, jerk) in &self.segments[i] {
                let h = rem.min(dur);
                if h > 0.0 {
                    qi += vi * h + ai * h * h / 2.0 + jerk * h * h * h / 6.0;
                    vi += ai * h + jerk * h * h / 2.0;
                    ai += jerk * h;
                }
                rem -= h;
                if rem <= 0.0 {
                    break;
                }
            }
            q[i] = qi;
            dq[i] = vi;
            ddq[i] = ai;
        }
        (q, dq, ddq)
    }

    /// Full sampled profile at the command rate.
    pub fn samples(&self) -> Vec<PlanSample> {
        let n = self.sample_count();
        (0..n)
            .map(|k| {
                let t = (k as f64 * self.dt).min(self.duration);
                let (q, dq, ddq) = self.state_at(t);
                PlanSample {
                    t: self.t0 + t,
                    q,
                    dq,
                    ddq,
                    jerk: self.jerk_at(t),
                }
            })
            .collect()
    }
}

/// Plan a synchronized jerk-limited move from `state` to rest at `q_goal`.
///
/// Joints starting with nonzero velocity or acceleration get a jerk-limited
/// stop ramp before the rest-to-rest S-curve. All joints finish at the same
/// instant: faster joints have their S-curve portion time-scaled, which
/// preserves the displacement and only loosens the derivative usage.
pub fn jpc_plan(
    state: &ControllerState,
    q_goal: &JointVector,
    limits: &MotionLimits,
    rate: f64,
) -> Result<JerkPlan> {
    limits.validate()?;
    if rate <= 0.0 {
        return Err(Error::InvalidLimits("command rate must be positive".into()));
    }
    let dof = state.dof();
    if q_goal.len() != dof || limits.dof() != dof {
        return Err(Error::DimensionMismatch {
            expected: dof,
            got: q_goal.len(),
        });
    }

    let mut stop_segments: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dof);
    let mut rest_segments: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dof);
    let mut stop_durations = vec![0.0_f64; dof];
    let mut rest_durations = vec![0.0_f64; dof];

    for i in 0..dof {
        let (jm, am, vm) = (limits.j_max[i], limits.a_max[i], limits.v_max[i]);
        let (q0, v0, a0) = (state.q[i], state.dq[i], state.ddq[i]);

        let stop = stop_ramp(v0, a0, vm, am, jm);
        let (q_stop, _, _) = integrate_segments(q0, v0, a0, &stop);
        let d = q_goal[i] - q_stop;
        let rest = if d.abs() < GOAL_EPS {
            Vec::new()
        } else {
            s_curve_segments(d, vm, am, jm)
        };

        stop_durations[i] = stop.iter().map(|s| s.0).sum();
        rest_durations[i] = rest.iter().map(|s| s.0).sum();
        stop_segments.push(stop);
        rest_segments.push(rest);
    }

    let total: f64 = (0..dof)
        .map(|i| stop_durations[i] + rest_durations[i])
        .fold(0.0, f64::max);

    let mut segments = Vec::with_capacity(dof);
    for i in 0..dof {
        let mut segs = stop_segments[i].clone();
        let target = total - stop_durations[i];
        if rest_durations[i] > 0.0 {
            let scale = target / rest_durations[i];
            for &(dur, jerk) in &rest_segments[i] {
                segs.push((dur * scale, jerk / (scale * scale * scale)));
            }
        } else if target > 0.0 {
            segs.push((target, 0.0));
        }
        segments.push(segs);
    }

    Ok(JerkPlan {
        dt: 1.0 / rate,
        t0: state.t,
        q_goal: q_goal.clone(),
        duration: total,
        start: state.clone(),
        segments,
    })
}

fn integrate_segments(q0: f64, v0: f64, a0: f64, segs: &[(f64, f64)]) -> (f64, f64, f64) {
    let (mut q, mut v, mut a) = (q0, v0, a0);
    for &(h, j) in segs {
        q += v * h + a * h * h / 2.0 + j * h * h * h / 6.0;
        v += a * h + j * h * h / 2.0;
        a += j * h;
    }
    (q, v, a)
}

/// Jerk segments bringing (v0, a0) to exact rest: first ramp the
/// acceleration to zero, then cancel the remaining velocity with a
/// jerk-limited acceleration pulse.
fn stop_ramp(v0: f64, a0: f64, _vm: f64, am: f64, jm: f64) -> Vec<(f64, f64)> {
    let mut segs = Vec::new();
    let mut v = v0;
    if a0.abs() > REST_EPS {
        let h = a0.abs() / jm;
        let j = -a0.signum() * jm;
        segs.push((h, j));
        v += a0 * h + j * h * h / 2.0;
    }
    if v.abs() > REST_EPS {
        let dv = -v;
        let s = dv.signum();
        let t1_tri = (dv.abs() / jm).sqrt();
        if t1_tri * jm <= am {
            segs.push((t1_tri, s * jm));
            segs.push((t1_tri, -s * jm));
        } else {
            let t1 = am / jm;
            let ta = (dv.abs() - jm * t1 * t1) / am;
            segs.push((t1, s * jm));
            segs.push((ta, 0.0));
            segs.push((t1, -s * jm));
        }
    }
    segs
}

/// Minimum-time rest-to-rest seven-segment S-curve for displacement `d`.
fn s_curve_segments(d: f64, vm: f64, am: f64, jm: f64) -> Vec<(f64, f64)> {
    let s = d.signum();
    let d = d.abs();

    // Time to reach vm: jerk phase t1 and constant-accel phase t2.
    let (mut t1, mut t2) = if vm * jm >= am * am {
        (am / jm, vm / am - am / jm)
    } else {
        ((vm / jm).sqrt(), 0.0)
    };
    let d_at_vm = vm * (2.0 * t1 + t2);
    let t3;
    if d >= d_at_vm {
        t3 = (d - d_at_vm) / vm;
    } else {
        t3 = 0.0;
        // No cruise. Try a profile that still saturates the acceleration.
        t1 = am / jm;
        let ta = (-3.0 * t1 + (t1 * t1 + 4.0 * d / am).sqrt()) / 2.0;
        if ta >= 0.0 {
            t2 = ta;
        } else {
            // Triangular acceleration profile.
            t1 = (d / (2.0 * jm)).cbrt();
            t2 = 0.0;
        }
    }

    let j = s * jm;
    let mut segs = Vec::with_capacity(7);
    segs.push((t1, j));
    if t2 > 0.0 {
        segs.push((t2, 0.0));
    }
    segs.push((t1, -j));
    if t3 > 0.0 {
        segs.push((t3, 0.0));
    }
    segs.push((t1, -j));
    if t2 > 0.0 {
        segs.push((t2, 0.0));
    }
    segs.push((t1, j));
    segs
}
