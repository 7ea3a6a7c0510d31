use nalgebra::{DMatrix, Isometry3, Translation3, UnitQuaternion, Vector3};

use super::{JointVector, Pose, RobotModel};
use crate::error::Result;

/// Forward kinematics output: the end-effector pose plus every link frame.
#[derive(Debug, Clone)]
pub struct FkResult {
    /// `frames[0]` is the base frame (identity); `frames[i]` the frame of
    /// joint i, so `frames.len() == dof + 1`.
    pub frames: Vec<Isometry3<f64>>,
    pub ee: Pose,
}

impl FkResult {
    pub fn ee_position(&self) -> Vector3<f64> {
        self.ee.position
    }
}

/// Forward kinematics of a modified-DH chain.
pub fn forward_kinematics(model: &RobotModel, q: &JointVector) -> Result<FkResult> {
    model.check_dimension(q)?;
    let mut frames = Vec::with_capacity(model.dof() + 1);
    let mut t = Isometry3::identity();
    frames.push(t);
    for (j, &qi) in model.joints.iter().zip(q.iter()) {
        let rot_x = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), j.alpha);
        let rot_z = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), qi + j.theta_offset);
        let step = Isometry3::from_parts(Translation3::new(j.a, 0.0, 0.0), rot_x)
            * Isometry3::from_parts(Translation3::new(0.0, 0.0, j.d), rot_z);
        // RotX(alpha) TransX(a) RotZ(theta) TransZ(d): RotZ leaves its own z
        // translation invariant, so TransZ and RotZ commute here.
        t *= step;
        frames.push(t);
    }
    let last = frames[model.dof()];
    let ee_pos = last * nalgebra::Point3::from(model.tool);
    let ee = Pose::new(ee_pos.coords, last.rotation);
    Ok(FkResult { frames, ee })
}

/// Geometric Jacobian of the end-effector, 6 x dof.
///
/// Rows 0..3 are linear velocity, rows 3..6 angular velocity; column i is
/// the twist per unit velocity of joint i.
pub fn jacobian(model: &RobotModel, q: &JointVector) -> Result<DMatrix<f64>> {
    let fk = forward_kinematics(model, q)?;
    let p_ee = fk.ee.position;
    let mut j = DMatrix::zeros(6, model.dof());
    for i in 0..model.dof() {
        // Joint i rotates about the z axis of frame i+1 (its own frame).
        let frame = &fk.frames[i + 1];
        let z = frame.rotation * Vector3::z();
        let p = frame.translation.vector;
        let lin = z.cross(&(p_ee - p));
        for r in 0..3 {
            j[(r, i)] = lin[r];
            j[(r + 3, i)] = z[r];
        }
    }
    Ok(j)
}

/// Position rows of the Jacobian, 3 x dof.
pub fn position_jacobian(model: &RobotModel, q: &JointVector) -> Result<DMatrix<f64>> {
    let full = jacobian(model, q)?;
    Ok(full.rows(0, 3).into_owned())
}
