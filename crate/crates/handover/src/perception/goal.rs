use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{Keypoint, SkeletonFrame, UncertaintyEstimate};
use crate::error::Result;
use crate::kinematics::Pose;

/// Tunable scalers and safe direction for uncertainty-based goal adaptation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalAdaptParams {
    /// Per-axis dimensionless scalers on the detection standard deviation.
    pub lambda: Vector3<f64>,
    /// Unit vector pointing away from the human.
    pub u_safe: Vector3<f64>,
}

impl Default for GoalAdaptParams {
    fn default() -> Self {
        Self {
            lambda: Vector3::new(1.0, 1.0, 1.0),
            u_safe: Vector3::z(),
        }
    }
}

impl GoalAdaptParams {
    pub fn validate(&self) -> Result<()> {
        if (self.u_safe.norm() - 1.0).abs() > 1e-9 {
            return Err(crate::error::Error::Config(
                "u_safe must be a unit vector".into(),
            ));
        }
        if self.lambda.iter().any(|&l| l < 0.0) {
            return Err(crate::error::Error::Config(
                "lambda components must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Where and how to deliver: keypoint to target, approach offset from it,
/// and the fixed delivery orientation.
#[derive(Debug, Clone)]
pub struct DeliverySpec {
    pub keypoint: Keypoint,
    /// Offset added to the keypoint position, m.
    pub offset: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Pre-delivery waypoint distance: the delivery pose is first
    /// approached from this far out along the offset direction, so the
    /// final approach is a short straight-in move instead of a swing past
    /// the human, m. Zero disables the waypoint.
    pub approach_retreat: f64,
}

impl Default for DeliverySpec {
    fn default() -> Self {
        Self {
            keypoint: Keypoint::RightWrist,
            offset: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
            approach_retreat: 0.15,
        }
    }
}

/// Nominal delivery pose: the tracked keypoint plus the approach offset,
/// with the stage's fixed orientation.
pub fn nominal_goal(frame: &SkeletonFrame, spec: &DeliverySpec) -> Result<Pose> {
    let p = frame.require(spec.keypoint)?;
    Ok(Pose::new(p + spec.offset, spec.orientation))
}

/// Push the delivery pose away from the human in proportion to the
/// detection uncertainty: `p += (lambda . sigma) . u_safe` componentwise
/// (Hadamard products). Orientation is unchanged.
pub fn adapt_goal(nominal: &Pose, u: &UncertaintyEstimate, params: &GoalAdaptParams) -> Pose {
    let offset = params
        .lambda
        .component_mul(&u.sigma)
        .component_mul(&params.u_safe);
    Pose::new(nominal.position + offset, nominal.orientation)
}
