//! Serial-arm kinematics: robot models, forward kinematics, Jacobians,
//! inverse kinematics and position null-space machinery.

mod fk;
mod ik;
mod model;
mod nullspace;

pub use fk::{forward_kinematics, jacobian, position_jacobian, FkResult};
pub use ik::{icop_correct, inverse_kinematics, inverse_kinematics_restarts, IkParams};
pub use model::{builtin_model, builtin_model_ids, JointParams, LinkCapsule, Pose, RobotModel};
pub use nullspace::position_null_space;

/// Joint-space vector (positions, velocities, ...), one entry per joint.
pub type JointVector = nalgebra::DVector<f64>;
