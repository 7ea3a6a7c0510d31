use std::path::{Path, PathBuf};

use nalgebra::{DVector, Quaternion, UnitQuaternion, Vector3};
use serde::Deserialize;

use crate::adaptation::AdaptParams;
use crate::control::{MotionLimits, SafetyParams};
use crate::error::{Error, Result};
use crate::kinematics::{builtin_model, JointVector, Pose, RobotModel};
use crate::perception::{BodyRadii, DeliverySpec, GoalAdaptParams, Keypoint, DEFAULT_WINDOW};
use crate::task::TaskEvent;

/// Which control cascade the scenario exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Pipeline {
    /// Pre-planned jerk-bounded stream with a jerk-level safety filter.
    #[serde(rename = "preplanned-jerk")]
    PreplannedJerk,
    /// Low-rate PD acceleration feedback with an acceleration-level filter.
    #[serde(rename = "feedback-accel")]
    FeedbackAccel,
}

/// Loop rates, Hz.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Rates {
    pub command: f64,
    pub safety: f64,
    pub perception: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TrackingParams {
    /// PD position gain, 1/s^2 (feedback-accel pipeline).
    pub kp: f64,
    /// PD velocity gain, 1/s.
    pub kd: f64,
    /// Servo bandwidth of the jerk-level plan-tracking loop, rad/s
    /// (preplanned-jerk pipeline). The feedback gains are a triple pole at
    /// this frequency.
    pub jerk_bandwidth: f64,
    /// Per-joint tracking error below which a motion stage counts as
    /// complete, rad.
    pub completion_tol: f64,
    /// Velocity/acceleration scale applied to moves whose goal clearance
    /// from the human is below `approach_clearance` (speed-and-separation:
    /// a close handover is approached slowly, so the safety filter never
    /// has to absorb a full-speed nominal).
    pub approach_scale: f64,
    /// Goal clearance below which `approach_scale` kicks in, m.
    pub approach_clearance: f64,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self {
            kp: 9.0,
            kd: 6.0,
            jerk_bandwidth: 15.0,
            completion_tol: 0.01,
            approach_scale: 0.3,
            approach_clearance: 0.45,
        }
    }
}

/// Declarative simulation input. Loaded from TOML; see `data/scenarios/`
/// for the documented layout.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub robot_id: String,
    pub pipeline: Pipeline,
    pub rates: Rates,
    pub duration: f64,
    pub rng_seed: u64,
    pub skeleton_path: PathBuf,
    pub return_required: bool,
    pub events: Vec<TaskEvent>,
    pub safety: SafetyParams,
    pub goal_adapt: GoalAdaptParams,
    pub adapt: AdaptParams,
    pub delivery: DeliverySpec,
    pub body_radii: BodyRadii,
    pub tracking: TrackingParams,
    pub stats_window: usize,
    /// Skeleton frames averaged when building the collision envelope.
    /// Detection noise is zero-mean, so a short moving average keeps the
    /// envelope from teleporting frame to frame; the uncertainty statistics
    /// always use the raw frames.
    pub smooth_window: usize,
    pub limits_override: Option<LimitsOverride>,
    pub object_pose: Pose,
    pub object_return_pose: Pose,
    pub home_q: JointVector,
    /// Carried-object capsule (attached to the tool while grasped).
    pub object_radius: f64,
    pub object_length: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LimitsOverride {
    pub v_max: Option<Vec<f64>>,
    pub a_max: Option<Vec<f64>>,
    pub j_max: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct ScenarioFile {
    name: String,
    robot: String,
    pipeline: Pipeline,
    duration: f64,
    #[serde(default)]
    rng_seed: u64,
    skeleton: String,
    #[serde(default = "default_true")]
    return_required: bool,
    rates: Rates,
    #[serde(default)]
    safety: Option<SafetyToml>,
    #[serde(default)]
    goal_adapt: Option<GoalAdaptToml>,
    #[serde(default)]
    adapt: Option<AdaptToml>,
    delivery: DeliveryToml,
    #[serde(default)]
    body: Option<BodyToml>,
    #[serde(default)]
    tracking: Option<TrackingToml>,
    #[serde(default)]
    stats_window: Option<usize>,
    #[serde(default)]
    smooth_window: Option<usize>,
    #[serde(default)]
    limits: Option<LimitsOverride>,
    poses: PosesToml,
    #[serde(default)]
    object: Option<ObjectToml>,
    #[serde(default)]
    events: Vec<EventToml>,
}

#[derive(Deserialize)]
struct SafetyToml {
    d_min: Option<f64>,
    k_v: Option<f64>,
    k_a: Option<f64>,
    eta: Option<f64>,
    brake_margin: Option<f64>,
}

#[derive(Deserialize)]
struct GoalAdaptToml {
    lambda: Option<[f64; 3]>,
    u_safe: Option<[f64; 3]>,
}

#[derive(Deserialize)]
struct AdaptToml {
    alpha: Option<f64>,
    lambda_omega: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Deserialize)]
struct DeliveryToml {
    #[serde(default = "default_keypoint")]
    keypoint: String,
    #[serde(default)]
    offset: [f64; 3],
    /// Unit quaternion, [w, x, y, z].
    orientation: [f64; 4],
    approach_retreat: Option<f64>,
}

#[derive(Deserialize)]
struct BodyToml {
    torso: Option<f64>,
    head: Option<f64>,
    limb: Option<f64>,
}

#[derive(Deserialize)]
struct TrackingToml {
    kp: Option<f64>,
    kd: Option<f64>,
    jerk_bandwidth: Option<f64>,
    completion_tol: Option<f64>,
    approach_scale: Option<f64>,
    approach_clearance: Option<f64>,
}

#[derive(Deserialize)]
struct PosesToml {
    object_position: [f64; 3],
    /// Unit quaternion, [w, x, y, z].
    object_orientation: [f64; 4],
    #[serde(default)]
    object_return_position: Option<[f64; 3]>,
    home_q: Vec<f64>,
}

#[derive(Deserialize)]
struct ObjectToml {
    radius: Option<f64>,
    length: Option<f64>,
}

#[derive(Deserialize)]
struct EventToml {
    kind: crate::task::TaskEventKind,
    t: f64,
}

fn default_true() -> bool {
    true
}

fn default_keypoint() -> String {
    "right_wrist".into()
}

fn quat(q: [f64; 4]) -> UnitQuaternion<f64> {
    UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
}

impl ScenarioConfig {
    /// Load and validate a scenario file; relative paths are resolved
    /// against the scenario's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
            context: "scenario".into(),
            message: e.to_string(),
        })?;

        let mut safety = SafetyParams::default();
        if let Some(s) = &file.safety {
            if let Some(v) = s.d_min {
                safety.d_min = v;
            }
            if let Some(v) = s.k_v {
                safety.k_v = v;
            }
            if let Some(v) = s.k_a {
                safety.k_a = v;
            }
            if let Some(v) = s.eta {
                safety.eta = v;
            }
            if let Some(v) = s.brake_margin {
                safety.brake_margin = v;
            }
        }

        let mut goal_adapt = GoalAdaptParams::default();
        if let Some(g) = &file.goal_adapt {
            if let Some(l) = g.lambda {
                goal_adapt.lambda = Vector3::from(l);
            }
            if let Some(u) = g.u_safe {
                goal_adapt.u_safe = Vector3::from(u);
            }
        }

        let mut adapt = AdaptParams {
            rng_seed: file.rng_seed,
            ..AdaptParams::default()
        };
        if let Some(a) = &file.adapt {
            if let Some(v) = a.alpha {
                adapt.alpha = v;
            }
            if let Some(v) = a.lambda_omega {
                adapt.lambda_omega = v;
            }
            if let Some(v) = a.max_iters {
                adapt.max_iters = v;
            }
        }

        let keypoint = Keypoint::parse(&file.delivery.keypoint).ok_or_else(|| {
            Error::Config(format!("unknown keypoint {:?}", file.delivery.keypoint))
        })?;
        let delivery = DeliverySpec {
            keypoint,
            offset: Vector3::from(file.delivery.offset),
            orientation: quat(file.delivery.orientation),
            approach_retreat: file
                .delivery
                .approach_retreat
                .unwrap_or_else(|| DeliverySpec::default().approach_retreat),
        };

        let mut body_radii = BodyRadii::default();
        if let Some(b) = &file.body {
            if let Some(v) = b.torso {
                body_radii.torso = v;
            }
            if let Some(v) = b.head {
                body_radii.head = v;
            }
            if let Some(v) = b.limb {
                body_radii.limb = v;
            }
        }

        let mut tracking = TrackingParams::default();
        if let Some(t) = &file.tracking {
            if let Some(v) = t.kp {
                tracking.kp = v;
            }
            if let Some(v) = t.kd {
                tracking.kd = v;
            }
            if let Some(v) = t.jerk_bandwidth {
                tracking.jerk_bandwidth = v;
            }
            if let Some(v) = t.completion_tol {
                tracking.completion_tol = v;
            }
            if let Some(v) = t.approach_scale {
                tracking.approach_scale = v;
            }
            if let Some(v) = t.approach_clearance {
                tracking.approach_clearance = v;
            }
        }

        let object_pose = Pose::new(
            Vector3::from(file.poses.object_position),
            quat(file.poses.object_orientation),
        );
        let object_return_pose = Pose::new(
            file.poses
                .object_return_position
                .map(Vector3::from)
                .unwrap_or(object_pose.position),
            object_pose.orientation,
        );

        let (object_radius, object_length) = match &file.object {
            Some(o) => (o.radius.unwrap_or(0.03), o.length.unwrap_or(0.10)),
            None => (0.03, 0.10),
        };

        let config = ScenarioConfig {
            name: file.name,
            robot_id: file.robot,
            pipeline: file.pipeline,
            rates: file.rates,
            duration: file.duration,
            rng_seed: file.rng_seed,
            skeleton_path: base_dir.join(&file.skeleton),
            return_required: file.return_required,
            events: file
                .events
                .iter()
                .map(|e| TaskEvent {
                    kind: e.kind,
                    t: e.t,
                })
                .collect(),
            safety,
            goal_adapt,
            adapt,
            delivery,
            body_radii,
            tracking,
            stats_window: file.stats_window.unwrap_or(DEFAULT_WINDOW),
            smooth_window: file.smooth_window.unwrap_or(2),
            limits_override: file.limits,
            object_pose,
            object_return_pose,
            home_q: DVector::from_vec(file.poses.home_q.clone()),
            object_radius,
            object_length,
        };
        config.validate()?;
        Ok(config)
    }

    /// Schema and cross-reference checks; does not simulate.
    pub fn validate(&self) -> Result<()> {
        if self.duration <= 0.0 {
            return Err(Error::Config("duration must be positive".into()));
        }
        if self.rates.safety < self.rates.command {
            return Err(Error::Config(
                "safety rate must be at least the command rate".into(),
            ));
        }
        if self.rates.command <= 0.0 || self.rates.perception <= 0.0 {
            return Err(Error::Config("rates must be positive".into()));
        }
        self.goal_adapt.validate()?;
        if self.smooth_window == 0 {
            return Err(Error::Config("smooth_window must be at least 1".into()));
        }
        if self.safety.d_min <= 0.0 || self.safety.eta <= 0.0 {
            return Err(Error::Config(
                "safety margin and decay rate must be positive".into(),
            ));
        }
        let mut last_t = f64::NEG_INFINITY;
        for e in &self.events {
            if e.t < last_t {
                return Err(Error::Config(
                    "event timestamps must be non-decreasing".into(),
                ));
            }
            last_t = e.t;
        }
        if !self.skeleton_path.exists() {
            return Err(Error::Config(format!(
                "skeleton trajectory not found: {}",
                self.skeleton_path.display()
            )));
        }
        let model = self.model()?;
        if self.home_q.len() != model.dof() {
            return Err(Error::Config(format!(
                "home_q has {} entries, model {} has {} joints",
                self.home_q.len(),
                model.name,
                model.dof()
            )));
        }
        if let Some(l) = &self.limits_override {
            for (name, v) in [("v_max", &l.v_max), ("a_max", &l.a_max), ("j_max", &l.j_max)] {
                if let Some(v) = v {
                    if v.len() != model.dof() {
                        return Err(Error::Config(format!(
                            "limits override {name} has wrong length"
                        )));
                    }
                    if v.iter().any(|&x| x <= 0.0) {
                        return Err(Error::Config(format!(
                            "limits override {name} must be positive"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<RobotModel> {
        builtin_model(&self.robot_id)
    }

    /// Effective motion limits: model defaults plus any overrides.
    pub fn motion_limits(&self, model: &RobotModel) -> MotionLimits {
        let mut limits = MotionLimits::from_model(model);
        if let Some(o) = &self.limits_override {
            if let Some(v) = &o.v_max {
                limits.v_max = DVector::from_vec(v.clone());
            }
            if let Some(v) = &o.a_max {
                limits.a_max = DVector::from_vec(v.clone());
            }
            if let Some(v) = &o.j_max {
                limits.j_max = DVector::from_vec(v.clone());
            }
        }
        limits
    }
}
