//! Shared fixtures and sampling helpers for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DVector, Point3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use handover::geometry::{Capsule, CapsuleSet};
use handover::kinematics::{builtin_model, JointParams, JointVector, LinkCapsule, RobotModel};
use handover::perception::{Keypoint, SkeletonFrame};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn fanuc() -> RobotModel {
    builtin_model("fanuc-lrmate-200id7l-like").expect("bundled model")
}

pub fn kinova() -> RobotModel {
    builtin_model("kinova-gen3-like").expect("bundled model")
}

/// Uniform random configuration strictly inside the joint limits.
pub fn random_config(model: &RobotModel, rng: &mut ChaCha8Rng) -> JointVector {
    DVector::from_fn(model.dof(), |i, _| {
        let j = &model.joints[i];
        let margin = 0.02 * (j.q_max - j.q_min);
        rng.gen_range(j.q_min + margin..j.q_max - margin)
    })
}

/// Single revolute joint spinning a horizontal link capsule about z.
///
/// The link spans x in [0.1, 0.8] of the joint frame; rotating the joint
/// sweeps it through the xy-plane toward any wall placed there.
pub fn one_dof_model() -> RobotModel {
    RobotModel {
        name: "one-dof".into(),
        joints: vec![JointParams {
            alpha: 0.0,
            a: 0.0,
            d: 0.0,
            theta_offset: 0.0,
            q_min: -std::f64::consts::PI,
            q_max: std::f64::consts::PI,
            v_max: 2.0,
            a_max: 6.0,
            j_max: 80.0,
        }],
        link_capsules: vec![LinkCapsule {
            link: 1,
            a: Point3::new(0.1, 0.0, 0.0),
            b: Point3::new(0.8, 0.0, 0.0),
            radius: 0.05,
        }],
        tool: Vector3::new(0.8, 0.0, 0.0),
    }
}

/// Vertical wall capsule for the one-dof model, at angle `phi` from the
/// link's zero position and distance `reach` from the axis.
pub fn one_dof_wall(phi: f64, reach: f64) -> CapsuleSet {
    let mut set = CapsuleSet::new();
    set.push(
        Capsule::new(
            Point3::new(reach * phi.cos(), reach * phi.sin(), -0.5),
            Point3::new(reach * phi.cos(), reach * phi.sin(), 0.5),
            0.05,
        ),
        "wall",
    );
    set
}

/// Full-body skeleton frame with the subject centered at `x` meters from
/// the robot base, right wrist reaching toward the robot.
pub fn human_frame(t: f64, x: f64) -> SkeletonFrame {
    let mut keypoints = BTreeMap::new();
    keypoints.insert(Keypoint::Pelvis, Vector3::new(x, 0.0, 0.90));
    keypoints.insert(Keypoint::Neck, Vector3::new(x, 0.0, 1.45));
    keypoints.insert(Keypoint::Head, Vector3::new(x, 0.0, 1.70));
    keypoints.insert(Keypoint::LeftShoulder, Vector3::new(x, 0.22, 1.45));
    keypoints.insert(Keypoint::RightShoulder, Vector3::new(x, -0.22, 1.45));
    keypoints.insert(Keypoint::LeftElbow, Vector3::new(x, 0.25, 1.15));
    keypoints.insert(Keypoint::LeftWrist, Vector3::new(x, 0.28, 0.90));
    keypoints.insert(Keypoint::RightElbow, Vector3::new(x - 0.30, -0.22, 1.25));
    keypoints.insert(Keypoint::RightWrist, Vector3::new(x - 0.55, -0.22, 1.00));
    SkeletonFrame {
        t,
        keypoints,
        confidence: BTreeMap::new(),
    }
}

/// Frame with a single keypoint at `p`.
pub fn single_keypoint_frame(t: f64, kp: Keypoint, p: Vector3<f64>) -> SkeletonFrame {
    let mut keypoints = BTreeMap::new();
    keypoints.insert(kp, p);
    SkeletonFrame {
        t,
        keypoints,
        confidence: BTreeMap::new(),
    }
}

/// Two frames whose per-axis sample standard deviation is exactly `sigma`
/// (two-point fixture: center plus/minus sigma over sqrt(2)).
pub fn frames_with_sigma(
    kp: Keypoint,
    center: Vector3<f64>,
    sigma: Vector3<f64>,
) -> Vec<SkeletonFrame> {
    let delta = sigma / 2.0_f64.sqrt();
    vec![
        single_keypoint_frame(0.0, kp, center - delta),
        single_keypoint_frame(0.1, kp, center + delta),
    ]
}

// --- shared independent oracles -------------------------------------------

use nalgebra::{DMatrix, Matrix4, Vector4};

/// Independent forward kinematics: plain homogeneous 4x4 matrix products
/// with hand-written rotation blocks, no isometry type involved.
pub fn naive_fk_position(model: &RobotModel, q: &JointVector) -> Vector3<f64> {
    fn rot_x(a: f64) -> Matrix4<f64> {
        let (s, c) = a.sin_cos();
        Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, c, -s, 0.0, //
            0.0, s, c, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }
    fn rot_z(a: f64) -> Matrix4<f64> {
        let (s, c) = a.sin_cos();
        Matrix4::new(
            c, -s, 0.0, 0.0, //
            s, c, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }
    fn trans(x: f64, y: f64, z: f64) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m[(0, 3)] = x;
        m[(1, 3)] = y;
        m[(2, 3)] = z;
        m
    }
    let mut t = Matrix4::identity();
    for (j, &qi) in model.joints.iter().zip(q.iter()) {
        t = t * trans(j.a, 0.0, 0.0)
            * rot_x(j.alpha)
            * trans(0.0, 0.0, j.d)
            * rot_z(qi + j.theta_offset);
    }
    let p = t * Vector4::new(model.tool.x, model.tool.y, model.tool.z, 1.0);
    Vector3::new(p.x, p.y, p.z)
}

/// Central finite-difference geometric Jacobian: position rows from the
/// end-effector position, angular rows from the relative rotation's
/// axis-angle vector.
pub fn fd_jacobian(model: &RobotModel, q: &JointVector, h: f64) -> DMatrix<f64> {
    use handover::kinematics::forward_kinematics;
    let mut j = DMatrix::zeros(6, model.dof());
    let mut qp = q.clone();
    for i in 0..model.dof() {
        qp[i] = q[i] + h;
        let plus = forward_kinematics(model, &qp).unwrap();
        qp[i] = q[i] - h;
        let minus = forward_kinematics(model, &qp).unwrap();
        qp[i] = q[i];
        let dp = (plus.ee.position - minus.ee.position) / (2.0 * h);
        let dw = (plus.ee.orientation * minus.ee.orientation.inverse()).scaled_axis() / (2.0 * h);
        for r in 0..3 {
            j[(r, i)] = dp[r];
            j[(r + 3, i)] = dw[r];
        }
    }
    j
}

/// Analytic minimum time of a rest-to-rest jerk-limited move of
/// displacement `d` (closed-form seven-segment S-curve duration).
pub fn s_curve_duration(d: f64, vm: f64, am: f64, jm: f64) -> f64 {
    let d = d.abs();
    if d == 0.0 {
        return 0.0;
    }
    // Velocity-ramp shape: jerk phase t1, constant-accel phase t2.
    let (t1, t2) = if vm * jm >= am * am {
        (am / jm, vm / am - am / jm)
    } else {
        ((vm / jm).sqrt(), 0.0)
    };
    let d_at_vm = vm * (2.0 * t1 + t2);
    if d >= d_at_vm {
        // Full profile with cruise: accelerate, cruise, decelerate.
        return 2.0 * (2.0 * t1 + t2) + (d - d_at_vm) / vm;
    }
    // No cruise; acceleration still saturates if a trapezoidal
    // acceleration profile fits: d = am t2^2 + 3 am t1 t2 + 2 am t1^2.
    let t1 = am / jm;
    let t2 = (-3.0 * t1 + (t1 * t1 + 4.0 * d / am).sqrt()) / 2.0;
    if t2 >= 0.0 {
        return 4.0 * t1 + 2.0 * t2;
    }
    // Triangular acceleration: d = 2 jm t1^3.
    4.0 * (d / (2.0 * jm)).cbrt()
}

/// Brute-force segment-segment distance by grid refinement. The pairwise
/// point distance is convex over the (s, t) parameter square, so shrinking
/// a regular grid around the best cell converges to the global minimum.
pub fn brute_force_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    const N: usize = 24;
    let (mut s_lo, mut s_hi, mut t_lo, mut t_hi) = (0.0_f64, 1.0_f64, 0.0_f64, 1.0_f64);
    let mut best = f64::INFINITY;
    for _ in 0..60 {
        let (mut bi, mut bj) = (0, 0);
        let mut window_best = f64::INFINITY;
        for i in 0..=N {
            let s = s_lo + (s_hi - s_lo) * i as f64 / N as f64;
            let a = p1 + (q1 - p1) * s;
            for j in 0..=N {
                let t = t_lo + (t_hi - t_lo) * j as f64 / N as f64;
                let b = p2 + (q2 - p2) * t;
                let d = (a - b).norm();
                if d < window_best {
                    window_best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        best = best.min(window_best);
        let bs = s_lo + (s_hi - s_lo) * bi as f64 / N as f64;
        let bt = t_lo + (t_hi - t_lo) * bj as f64 / N as f64;
        // A diagonal valley can put the window's best sample far from the
        // true minimizer: when the best lands on the window edge, re-center
        // there at the same width and walk along the valley; only shrink
        // once the best is interior.
        // An edge shared with the domain boundary is a genuine optimum
        // location (endpoint minimizers), not a sign the window is short.
        let on_edge = (bi == 0 && s_lo > 0.0)
            || (bi == N && s_hi < 1.0)
            || (bj == 0 && t_lo > 0.0)
            || (bj == N && t_hi < 1.0);
        let factor = if on_edge { 0.5 } else { 2.0 / N as f64 };
        let (ds, dt) = (factor * (s_hi - s_lo), factor * (t_hi - t_lo));
        s_lo = (bs - ds).max(0.0);
        s_hi = (bs + ds).min(1.0);
        t_lo = (bt - dt).max(0.0);
        t_hi = (bt + dt).min(1.0);
        if (s_hi - s_lo).max(t_hi - t_lo) < 1e-10 {
            break;
        }
    }
    best
}
