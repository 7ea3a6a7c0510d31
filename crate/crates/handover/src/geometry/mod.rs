//! Capsule primitives and robot-environment minimum distance.

mod capsule;
mod distance;

pub use capsule::{capsule_distance, segment_distance, Capsule, CapsuleSet, SegmentWitness};
pub use distance::{distance_gradient, min_distance, placed_robot_capsules, MinDistance};
