use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Keypoint, SkeletonFrame};
use crate::error::Result;
use crate::geometry::{Capsule, CapsuleSet};

/// Body-part capsule radii, m. The values are engineering estimates and
/// configurable per scenario.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BodyRadii {
    pub torso: f64,
    pub head: f64,
    pub limb: f64,
}

impl Default for BodyRadii {
    fn default() -> Self {
        Self {
            torso: 0.15,
            head: 0.12,
            limb: 0.06,
        }
    }
}

/// Hands extend this far past the wrist along the forearm, m.
const HAND_EXTENSION: f64 = 0.08;
/// Merged thigh capsule length below the pelvis, m.
const TRUNK_DROP: f64 = 0.40;
/// Head offset above the neck when no head keypoint is detected, m.
const HEAD_RISE: f64 = 0.25;

/// Nine-capsule body model from a skeleton frame, with default radii.
pub fn human_capsules(frame: &SkeletonFrame) -> Result<CapsuleSet> {
    human_capsules_with_radii(frame, &BodyRadii::default())
}

/// Nine-capsule body model: torso, lower trunk (merged thighs), shoulder
/// bar, neck, head, and left/right upper arms and forearms(+hands).
///
/// Requires shoulders, pelvis, elbows and wrists; neck and head are derived
/// from those when not detected. Deterministic for identical frames.
pub fn human_capsules_with_radii(frame: &SkeletonFrame, radii: &BodyRadii) -> Result<CapsuleSet> {
    let r_sh = frame.require(Keypoint::RightShoulder)?;
    let l_sh = frame.require(Keypoint::LeftShoulder)?;
    let pelvis = frame.require(Keypoint::Pelvis)?;
    let r_el = frame.require(Keypoint::RightElbow)?;
    let l_el = frame.require(Keypoint::LeftElbow)?;
    let r_wr = frame.require(Keypoint::RightWrist)?;
    let l_wr = frame.require(Keypoint::LeftWrist)?;

    let neck = frame
        .keypoint(Keypoint::Neck)
        .unwrap_or_else(|| (r_sh + l_sh) / 2.0);
    let up = {
        let v = neck - pelvis;
        let n = v.norm();
        if n > 1e-9 {
            v / n
        } else {
            Vector3::z()
        }
    };
    let head = frame
        .keypoint(Keypoint::Head)
        .unwrap_or_else(|| neck + up * HEAD_RISE);

    let pt = |v: Vector3<f64>| Point3::from(v);
    let forearm_end = |elbow: Vector3<f64>, wrist: Vector3<f64>| {
        let v = wrist - elbow;
        let n = v.norm();
        if n > 1e-9 {
            wrist + v / n * HAND_EXTENSION
        } else {
            wrist
        }
    };

    let mut set = CapsuleSet::new();
    set.push(Capsule::new(pt(pelvis), pt(neck), radii.torso), "torso");
    set.push(
        Capsule::new(pt(pelvis), pt(pelvis - up * TRUNK_DROP), radii.torso),
        "lower_trunk",
    );
    set.push(Capsule::new(pt(l_sh), pt(r_sh), radii.limb), "shoulders");
    set.push(Capsule::new(pt(neck), pt(head), radii.limb), "neck");
    set.push(Capsule::sphere(pt(head), radii.head), "head");
    set.push(
        Capsule::new(pt(r_sh), pt(r_el), radii.limb),
        "right_upper_arm",
    );
    set.push(
        Capsule::new(pt(l_sh), pt(l_el), radii.limb),
        "left_upper_arm",
    );
    set.push(
        Capsule::new(pt(r_el), pt(forearm_end(r_el, r_wr)), radii.limb),
        "right_forearm",
    );
    set.push(
        Capsule::new(pt(l_el), pt(forearm_end(l_el, l_wr)), radii.limb),
        "left_forearm",
    );
    Ok(set)
}
