use nalgebra::{Point3, UnitQuaternion, Vector3};
use serde::Deserialize;

use crate::error::{Error, Result};

/// End-effector pose: Cartesian position plus unit-quaternion orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    /// Angle of the relative rotation between the two orientations, rad.
    pub fn orientation_error(&self, other: &Pose) -> f64 {
        self.orientation.rotation_to(&other.orientation).angle()
    }
}

/// One revolute joint in modified Denavit-Hartenberg form.
///
/// `alpha` and `a` describe the previous link (twist about and offset along
/// its x axis), `d` the offset along this joint's z axis, `theta_offset` the
/// zero-position angle. Limits are per-joint bounds used by planners and the
/// integrators.
#[derive(Debug, Clone, Deserialize)]
pub struct JointParams {
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub j_max: f64,
}

/// Collision capsule rigidly attached to a link frame.
///
/// `link` 0 is the fixed base frame; `link` i (1..=dof) is the frame of
/// joint i as returned by forward kinematics.
#[derive(Debug, Clone)]
pub struct LinkCapsule {
    pub link: usize,
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub radius: f64,
}

/// Kinematic description of a serial arm.
#[derive(Debug, Clone)]
pub struct RobotModel {
    pub name: String,
    pub joints: Vec<JointParams>,
    pub link_capsules: Vec<LinkCapsule>,
    /// Tool point expressed in the last joint frame.
    pub tool: Vector3<f64>,
}

impl RobotModel {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn check_dimension(&self, q: &super::JointVector) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(())
    }

    pub fn within_position_limits(&self, q: &super::JointVector) -> bool {
        self.joints
            .iter()
            .zip(q.iter())
            .all(|(j, &qi)| qi >= j.q_min && qi <= j.q_max)
    }

    pub fn clamp_to_limits(&self, q: &mut super::JointVector) {
        for (i, j) in self.joints.iter().enumerate() {
            q[i] = q[i].clamp(j.q_min, j.q_max);
        }
    }

    fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::Config("model must have at least one joint".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if j.q_min >= j.q_max {
                return Err(Error::Config(format!(
                    "joint {i}: q_min must be below q_max"
                )));
            }
            if j.v_max <= 0.0 || j.a_max <= 0.0 || j.j_max <= 0.0 {
                return Err(Error::Config(format!(
                    "joint {i}: velocity/acceleration/jerk limits must be positive"
                )));
            }
        }
        for (i, c) in self.link_capsules.iter().enumerate() {
            if c.radius <= 0.0 {
                return Err(Error::Config(format!("capsule {i}: radius must be > 0")));
            }
            if c.link > self.joints.len() {
                return Err(Error::Config(format!(
                    "capsule {i}: link index {} out of range",
                    c.link
                )));
            }
        }
        Ok(())
    }

    /// Parse a model from its TOML description (see `data/models/`).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse {
            context: "robot model".into(),
            message: e.to_string(),
        })?;
        let model = RobotModel {
            name: file.name,
            joints: file.joints,
            link_capsules: file
                .capsules
                .into_iter()
                .map(|c| LinkCapsule {
                    link: c.link,
                    a: Point3::new(c.a[0], c.a[1], c.a[2]),
                    b: Point3::new(c.b[0], c.b[1], c.b[2]),
                    radius: c.radius,
                })
                .collect(),
            tool: Vector3::new(file.tool[0], file.tool[1], file.tool[2]),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }
}

#[derive(Deserialize)]
struct ModelFile {
    name: String,
    #[serde(default = "zero3")]
    tool: [f64; 3],
    joints: Vec<JointParams>,
    #[serde(default)]
    capsules: Vec<CapsuleToml>,
}

#[derive(Deserialize)]
struct CapsuleToml {
    link: usize,
    a: [f64; 3],
    b: [f64; 3],
    radius: f64,
}

fn zero3() -> [f64; 3] {
    [0.0; 3]
}

const FANUC_LIKE: &str = include_str!("../../data/models/fanuc-lrmate-200id7l-like.toml");
const KINOVA_LIKE: &str = include_str!("../../data/models/kinova-gen3-like.toml");

/// Identifiers of the bundled models.
pub fn builtin_model_ids() -> &'static [&'static str] {
    &["fanuc-lrmate-200id7l-like", "kinova-gen3-like"]
}

/// Load a bundled model by identifier.
pub fn builtin_model(id: &str) -> Result<RobotModel> {
    match id {
        "fanuc-lrmate-200id7l-like" => RobotModel::from_toml_str(FANUC_LIKE),
        "kinova-gen3-like" => RobotModel::from_toml_str(KINOVA_LIKE),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}
