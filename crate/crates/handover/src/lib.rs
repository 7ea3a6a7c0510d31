//! Safe human-robot handover stack.
//!
//! The crate is organized around a five-stage handover pipeline
//! (idle, reach, deliver, return, home) executed by a deterministic
//! multi-rate simulator:
//!
//! - [`kinematics`]: serial-arm models, forward kinematics, Jacobians,
//!   damped-least-squares inverse kinematics and null-space machinery.
//! - [`geometry`]: capsule primitives and minimum robot-environment distance.
//! - [`perception`]: skeleton trajectory ingestion, windowed keypoint
//!   statistics, and uncertainty-adapted delivery goals.
//! - [`adaptation`]: null-space search that maximizes human clearance
//!   while pinning the delivery position.
//! - [`control`]: jerk-bounded S-curve tracking, PD acceleration tracking,
//!   and jerk/acceleration-level safe-set filters.
//! - [`task`]: the handover stage machine.
//! - [`sim`]: scenario configs, the closed-loop simulator, and run logs.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability, and the `handover` binary for the scenario CLI.

pub mod adaptation;
pub mod cli;
pub mod control;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod perception;
pub mod sim;
pub mod task;

pub use error::{Error, Result};
