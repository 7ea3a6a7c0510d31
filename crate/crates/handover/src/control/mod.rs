//! Tracking controllers and safe-set filters.
//!
//! Two tracking routes mirror the two hardware control interfaces: a
//! pre-planned jerk-bounded position stream ([`jpc_plan`]) and a low-rate
//! PD acceleration feedback law ([`pd_acceleration`]). Each is paired with
//! a safe-set filter one derivative up: [`jssa_filter`] on jerk commands,
//! [`ssa_filter`] on acceleration commands.

mod integrate;
mod jpc;
mod pd;
mod safety;
mod types;

pub use integrate::{integrate_step, Command};
pub use jpc::{jpc_plan, JerkPlan, PlanSample};
pub use pd::pd_acceleration;
pub use safety::{
    approach_speed_cap, jssa_filter, safety_index, ssa_filter, FilterOutcome, SafetyIndex,
    SafetyOrder,
};
pub use types::{ControllerState, MotionLimits, SafetyParams};
