use nalgebra::Vector3;

use super::{Keypoint, SkeletonFrame};
use crate::error::{Error, Result};

/// Window length used for keypoint statistics when none is configured.
pub const DEFAULT_WINDOW: usize = 10;

/// Per-axis sample standard deviation of a keypoint over a frame window.
#[derive(Debug, Clone)]
pub struct UncertaintyEstimate {
    /// Per-axis standard deviation, m.
    pub sigma: Vector3<f64>,
    /// Number of frames actually used.
    pub window: usize,
    pub keypoint: Keypoint,
}

/// Windowed keypoint statistics: sample standard deviation (N-1 denominator)
/// and mean position over the last `window` frames that contain `keypoint`.
pub fn keypoint_stats(
    frames: &[SkeletonFrame],
    keypoint: Keypoint,
    window: usize,
) -> Result<(UncertaintyEstimate, Vector3<f64>)> {
    let positions: Vec<Vector3<f64>> = frames
        .iter()
        .filter_map(|f| f.keypoint(keypoint))
        .collect();
    let available = positions.len();
    if window < 2 || available < 2 {
        return Err(Error::InsufficientFrames {
            needed: window.max(2),
            available,
        });
    }
    let used = &positions[available.saturating_sub(window)..];
    let n = used.len() as f64;
    let mean = used.iter().sum::<Vector3<f64>>() / n;
    let mut var = Vector3::zeros();
    for p in used {
        let d = p - mean;
        var += d.component_mul(&d);
    }
    var /= n - 1.0;
    Ok((
        UncertaintyEstimate {
            sigma: var.map(f64::sqrt),
            window: used.len(),
            keypoint,
        },
        mean,
    ))
}
