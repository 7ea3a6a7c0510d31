use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{JointVector, RobotModel};

/// Per-joint velocity, acceleration and jerk bounds.
#[derive(Debug, Clone)]
pub struct MotionLimits {
    pub v_max: DVector<f64>,
    pub a_max: DVector<f64>,
    pub j_max: DVector<f64>,
}

impl MotionLimits {
    pub fn new(v_max: DVector<f64>, a_max: DVector<f64>, j_max: DVector<f64>) -> Result<Self> {
        let limits = Self {
            v_max,
            a_max,
            j_max,
        };
        limits.validate()?;
        Ok(limits)
    }

    pub fn from_model(model: &RobotModel) -> Self {
        Self {
            v_max: DVector::from_iterator(model.dof(), model.joints.iter().map(|j| j.v_max)),
            a_max: DVector::from_iterator(model.dof(), model.joints.iter().map(|j| j.a_max)),
            j_max: DVector::from_iterator(model.dof(), model.joints.iter().map(|j| j.j_max)),
        }
    }

    /// Uniform per-joint limits, mostly for single-joint surrogates.
    pub fn uniform(dof: usize, v_max: f64, a_max: f64, j_max: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(dof, v_max),
            DVector::from_element(dof, a_max),
            DVector::from_element(dof, j_max),
        )
    }

    pub fn dof(&self) -> usize {
        self.v_max.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_max.len() != self.v_max.len() || self.j_max.len() != self.v_max.len() {
            return Err(Error::InvalidLimits("limit vectors must share length".into()));
        }
        for i in 0..self.v_max.len() {
            if self.v_max[i] <= 0.0 || self.a_max[i] <= 0.0 || self.j_max[i] <= 0.0 {
                return Err(Error::InvalidLimits(format!(
                    "joint {i}: limits must be strictly positive"
                )));
            }
        }
        Ok(())
    }
}

/// Integrated joint-space state of the simulated arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub q: JointVector,
    pub dq: JointVector,
    pub ddq: JointVector,
    /// Time, s.
    pub t: f64,
}

impl ControllerState {
    pub fn at_rest(q: JointVector, t: f64) -> Self {
        let dof = q.len();
        Self {
            q,
            dq: DVector::zeros(dof),
            ddq: DVector::zeros(dof),
            t,
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }
}

/// Safe-set filter parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SafetyParams {
    /// Safety margin, m.
    pub d_min: f64,
    /// Velocity-term gain, s.
    pub k_v: f64,
    /// Acceleration-term gain (jerk-level index only), s^2.
    pub k_a: f64,
    /// Constraint decay rate, 1/s.
    pub eta: f64,
    /// Fraction of the nominal braking capability the speed cap assumes is
    /// actually available (covers gradient curvature and discretization).
    pub brake_margin: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self {
            d_min: 0.10,
            k_v: 1.0,
            k_a: 0.2,
            eta: 5.0,
            brake_margin: 0.5,
        }
    }
}
