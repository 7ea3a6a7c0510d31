//! Five-stage handover state machine and per-stage goal resolution.

use serde::{Deserialize, Serialize};

use crate::adaptation::{user_adapt_from, AdaptParams, AdaptResult};
use crate::error::{Error, Result};
use crate::geometry::CapsuleSet;
use crate::kinematics::{
    inverse_kinematics_restarts, IkParams, JointVector, Pose, RobotModel,
};

/// Seed restarts used when the current-configuration IK seed stalls.
const IK_RESTARTS: usize = 20;
use crate::perception::{
    adapt_goal, keypoint_stats, nominal_goal, DeliverySpec, GoalAdaptParams, SkeletonFrame,
};

/// Handover pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Idle,
    Reach,
    Deliver,
    Return,
    Home,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Idle => "idle",
            Stage::Reach => "reach",
            Stage::Deliver => "deliver",
            Stage::Return => "return",
            Stage::Home => "home",
        }
    }
}

/// Scripted event driving stage transitions (stands in for live human
/// intention recognition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskEventKind {
    HumanRequests,
    ObjectGrasped,
    HumanTookObject,
    HumanReturnedObject,
    ObjectPlaced,
    AtHome,
}

impl TaskEventKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskEventKind::HumanRequests => "human_requests",
            TaskEventKind::ObjectGrasped => "object_grasped",
            TaskEventKind::HumanTookObject => "human_took_object",
            TaskEventKind::HumanReturnedObject => "human_returned_object",
            TaskEventKind::ObjectPlaced => "object_placed",
            TaskEventKind::AtHome => "at_home",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskEvent {
    pub kind: TaskEventKind,
    /// Earliest time the event fires, s.
    pub t: f64,
}

/// Goal request emitted on stage entry.
#[derive(Debug, Clone, PartialEq)]
pub enum GoalRequest {
    /// Move to the object pickup pose.
    ObjectPose,
    /// Deliver near the human hand (perception-driven).
    Delivery,
    /// Put the object back at its home pose.
    ObjectReturn,
    /// Go to the home joint configuration.
    HomeConfiguration,
}

/// Deterministic transition table. Emits a goal request exactly when a new
/// stage is entered. `return_required` keeps the Return stage in the loop;
/// otherwise Deliver skips straight to Home once the human takes the object.
pub fn step_stage(
    current: Stage,
    event: &TaskEvent,
    return_required: bool,
) -> Result<(Stage, Option<GoalRequest>)> {
    use Stage::*;
    use TaskEventKind::*;
    match (current, event.kind) {
        (Idle, HumanRequests) => Ok((Reach, Some(GoalRequest::ObjectPose))),
        (Reach, ObjectGrasped) => Ok((Deliver, Some(GoalRequest::Delivery))),
        (Deliver, HumanTookObject) => {
            if return_required {
                // Keep delivering position until the human hands the object
                // back; no new goal is issued.
                Ok((Deliver, None))
            } else {
                Ok((Home, Some(GoalRequest::HomeConfiguration)))
            }
        }
        (Deliver, HumanReturnedObject) if return_required => {
            Ok((Return, Some(GoalRequest::ObjectReturn)))
        }
        (Return, ObjectPlaced) => Ok((Home, Some(GoalRequest::HomeConfiguration))),
        (Home, AtHome) => Ok((Idle, None)),
        (stage, kind) => Err(Error::IllegalTransition {
            stage: stage.name().to_string(),
            event: kind.name().to_string(),
        }),
    }
}

/// Inputs needed to resolve a goal request into a joint goal.
pub struct GoalContext<'a> {
    pub model: &'a RobotModel,
    /// Skeleton history up to now (used for Deliver goals).
    pub frames: &'a [SkeletonFrame],
    /// Environment capsules for the adaptation step.
    pub env: &'a CapsuleSet,
    pub delivery: &'a DeliverySpec,
    pub goal_adapt: &'a GoalAdaptParams,
    pub adapt: &'a AdaptParams,
    pub stats_window: usize,
    /// Static poses from the scenario.
    pub object_pose: &'a Pose,
    pub object_return_pose: &'a Pose,
    pub home_configuration: &'a JointVector,
    /// IK seed (typically the current configuration).
    pub q_seed: &'a JointVector,
}

/// A resolved joint goal plus the intermediate products worth logging.
#[derive(Debug, Clone)]
pub struct ResolvedGoal {
    pub q_g: JointVector,
    /// Pre-goal waypoint to visit first (Deliver goals: the retreated
    /// approach configuration), if one applies and is reachable.
    pub approach: Option<JointVector>,
    pub cartesian: Option<Pose>,
    pub adaptation: Option<AdaptSummary>,
}

#[derive(Debug, Clone)]
pub struct AdaptSummary {
    pub clearance_before: f64,
    pub clearance_after: f64,
    pub orientation_error: f64,
    pub no_null_space: bool,
}

/// Resolve a goal request.
///
/// Deliver goals run the full pipeline: windowed statistics, nominal goal,
/// uncertainty adaptation, IK, then null-space user adaptation against the
/// environment. Reach/Return goals run IK on their configured poses; Home
/// returns the configured joint configuration directly.
/// Retreated pre-delivery configuration, or `None` when disabled,
/// degenerate, or unreachable (the waypoint is an optimization, not a
/// requirement).
fn delivery_approach(
    ctx: &GoalContext,
    goal_pose: &Pose,
    q_g: &JointVector,
    ik_params: &IkParams,
) -> Option<JointVector> {
    let retreat = ctx.delivery.approach_retreat;
    let len = ctx.delivery.offset.norm();
    if retreat <= 0.0 || len < 1e-9 {
        return None;
    }
    let pre = Pose::new(
        goal_pose.position + ctx.delivery.offset * (retreat / len),
        goal_pose.orientation,
    );
    // Seed from the current configuration, not the delivery goal: the long
    // leg of the move is getting to the waypoint, so its configuration
    // should be the one closest to where the robot already is.
    let _ = q_g;
    inverse_kinematics_restarts(
        ctx.model,
        &pre,
        ctx.q_seed,
        ik_params,
        IK_RESTARTS,
        ctx.adapt.rng_seed,
    )
    .ok()
}

pub fn resolve_goal(request: &GoalRequest, ctx: &GoalContext) -> Result<ResolvedGoal> {
    let ik_params = IkParams::default();
    match request {
        GoalRequest::HomeConfiguration => Ok(ResolvedGoal {
            q_g: ctx.home_configuration.clone(),
            approach: None,
            cartesian: None,
            adaptation: None,
        }),
        GoalRequest::ObjectPose | GoalRequest::ObjectReturn => {
            let pose = if matches!(request, GoalRequest::ObjectPose) {
                ctx.object_pose
            } else {
                ctx.object_return_pose
            };
            let q = inverse_kinematics_restarts(
                ctx.model,
                pose,
                ctx.q_seed,
                &ik_params,
                IK_RESTARTS,
                ctx.adapt.rng_seed,
            )
            .map_err(|e| Error::IkFailed(e.to_string()))?;
            Ok(ResolvedGoal {
                q_g: q,
                approach: None,
                cartesian: Some(pose.clone()),
                adaptation: None,
            })
        }
        GoalRequest::Delivery => {
            let frame = ctx.frames.last().ok_or(Error::EmptyTrajectory)?;
            let nominal = nominal_goal(frame, ctx.delivery)?;
            let (uncertainty, _mean) =
                keypoint_stats(ctx.frames, ctx.delivery.keypoint, ctx.stats_window)?;
            let adapted = adapt_goal(&nominal, &uncertainty, ctx.goal_adapt);
            let q_seeded = inverse_kinematics_restarts(
                ctx.model,
                &adapted,
                ctx.q_seed,
                &ik_params,
                IK_RESTARTS,
                ctx.adapt.rng_seed,
            )
            .map_err(|e| Error::IkFailed(e.to_string()))?;
            let result: AdaptResult = user_adapt_from(ctx.model, &q_seeded, ctx.env, ctx.adapt)?;
            let clearance_before =
                crate::geometry::min_distance(ctx.model, &q_seeded, ctx.env)?.distance;
            // Pre-delivery waypoint: the same pose retreated along the
            // offset direction. Visiting it first turns the final approach
            // into a short straight-in move; a direct joint-space swing
            // from the pickup can bulge the end effector past the human.
            let approach = delivery_approach(ctx, &adapted, &result.q_g, &ik_params);
            Ok(ResolvedGoal {
                q_g: result.q_g.clone(),
                approach,
                cartesian: Some(adapted),
                adaptation: Some(AdaptSummary {
                    clearance_before,
                    clearance_after: result.clearance,
                    orientation_error: result.orientation_error,
                    no_null_space: result.no_null_space,
                }),
            })
        }
    }
}
