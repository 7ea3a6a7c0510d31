//! Skeleton ingestion, windowed keypoint statistics, and the
//! uncertainty-adapted delivery goal.

mod body;
mod goal;
mod skeleton;
mod stats;

pub use body::{human_capsules, human_capsules_with_radii, BodyRadii};
pub use goal::{adapt_goal, nominal_goal, DeliverySpec, GoalAdaptParams};
pub use skeleton::{
    average_frames, load_skeleton_trajectory, parse_skeleton_trajectory, Keypoint, SkeletonFrame,
};
pub use stats::{keypoint_stats, UncertaintyEstimate, DEFAULT_WINDOW};
