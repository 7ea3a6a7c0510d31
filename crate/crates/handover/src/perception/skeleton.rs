use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named skeleton keypoints tracked by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keypoint {
    RightWrist,
    LeftWrist,
    RightElbow,
    LeftElbow,
    RightShoulder,
    LeftShoulder,
    Head,
    Pelvis,
    Neck,
}

impl Keypoint {
    pub fn name(&self) -> &'static str {
        match self {
            Keypoint::RightWrist => "right_wrist",
            Keypoint::LeftWrist => "left_wrist",
            Keypoint::RightElbow => "right_elbow",
            Keypoint::LeftElbow => "left_elbow",
            Keypoint::RightShoulder => "right_shoulder",
            Keypoint::LeftShoulder => "left_shoulder",
            Keypoint::Head => "head",
            Keypoint::Pelvis => "pelvis",
            Keypoint::Neck => "neck",
        }
    }

    pub fn parse(name: &str) -> Option<Keypoint> {
        match name {
            "right_wrist" => Some(Keypoint::RightWrist),
            "left_wrist" => Some(Keypoint::LeftWrist),
            "right_elbow" => Some(Keypoint::RightElbow),
            "left_elbow" => Some(Keypoint::LeftElbow),
            "right_shoulder" => Some(Keypoint::RightShoulder),
            "left_shoulder" => Some(Keypoint::LeftShoulder),
            "head" => Some(Keypoint::Head),
            "pelvis" => Some(Keypoint::Pelvis),
            "neck" => Some(Keypoint::Neck),
            _ => None,
        }
    }
}

/// One timestamped skeleton detection.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    /// Timestamp, s.
    pub t: f64,
    pub keypoints: BTreeMap<Keypoint, Vector3<f64>>,
    /// Per-keypoint detection confidence in [0, 1]; absent means 1.
    pub confidence: BTreeMap<Keypoint, f64>,
}

impl SkeletonFrame {
    /// Keypoint position if present with positive confidence.
    pub fn keypoint(&self, kp: Keypoint) -> Option<Vector3<f64>> {
        let p = self.keypoints.get(&kp)?;
        if self.confidence.get(&kp).copied().unwrap_or(1.0) > 0.0 {
            Some(*p)
        } else {
            None
        }
    }

    pub fn require(&self, kp: Keypoint) -> Result<Vector3<f64>> {
        self.keypoint(kp)
            .ok_or_else(|| Error::MissingKeypoint(kp.name().to_string()))
    }
}

/// Average the keypoint positions across `frames` (typically the last few
/// detections) into one frame stamped with the last frame's timestamp.
///
/// Detection noise is zero-mean, so a short moving average gives a far
/// steadier body estimate than the raw latest frame. Each keypoint is
/// averaged over the frames where it is present with positive confidence
/// and carries the minimum of those confidences. Returns `None` for an
/// empty slice.
pub fn average_frames(frames: &[SkeletonFrame]) -> Option<SkeletonFrame> {
    let last = frames.last()?;
    let mut keypoints = BTreeMap::new();
    let mut confidence = BTreeMap::new();
    for &kp in last.keypoints.keys() {
        let mut sum = Vector3::zeros();
        let mut conf = f64::INFINITY;
        let mut n = 0;
        for frame in frames {
            if let Some(p) = frame.keypoint(kp) {
                sum += p;
                conf = conf.min(frame.confidence.get(&kp).copied().unwrap_or(1.0));
                n += 1;
            }
        }
        if n > 0 {
            keypoints.insert(kp, sum / n as f64);
            confidence.insert(kp, conf);
        }
    }
    Some(SkeletonFrame {
        t: last.t,
        keypoints,
        confidence,
    })
}

#[derive(Deserialize)]
struct FrameRecord {
    t: f64,
    keypoints: BTreeMap<String, [f64; 3]>,
    #[serde(default)]
    confidence: BTreeMap<String, f64>,
}

/// Parse a line-delimited JSON skeleton trajectory.
///
/// One frame per line: `{"t": <s>, "keypoints": {"right_wrist": [x,y,z],
/// ...}, "confidence": {"right_wrist": 1.0, ...}}`. Confidence entries are
/// optional and default to 1. Frames are returned sorted by timestamp.
pub fn parse_skeleton_trajectory(text: &str) -> Result<Vec<SkeletonFrame>> {
    let mut frames = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: FrameRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            context: format!("skeleton trajectory line {}", lineno + 1),
            message: e.to_string(),
        })?;
        let mut keypoints = BTreeMap::new();
        for (name, p) in rec.keypoints {
            let kp = Keypoint::parse(&name).ok_or_else(|| Error::Parse {
                context: format!("skeleton trajectory line {}", lineno + 1),
                message: format!("unknown keypoint {name:?}"),
            })?;
            keypoints.insert(kp, Vector3::new(p[0], p[1], p[2]));
        }
        let mut confidence = BTreeMap::new();
        for (name, c) in rec.confidence {
            let kp = Keypoint::parse(&name).ok_or_else(|| Error::Parse {
                context: format!("skeleton trajectory line {}", lineno + 1),
                message: format!("unknown keypoint {name:?}"),
            })?;
            confidence.insert(kp, c);
        }
        frames.push(SkeletonFrame {
            t: rec.t,
            keypoints,
            confidence,
        });
    }
    if frames.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    frames.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(frames)
}

/// Load a skeleton trajectory file (see [`parse_skeleton_trajectory`]).
pub fn load_skeleton_trajectory(path: &std::path::Path) -> Result<Vec<SkeletonFrame>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_skeleton_trajectory(&text)
}
