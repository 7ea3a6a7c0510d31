use nalgebra::{DVector, Point3};

use super::{GoalRecord, LogRow, Pipeline, RunLog, ScenarioConfig, StageSpan};
use crate::adaptation::AdaptParams;
use crate::control::{
    integrate_step, jpc_plan, jssa_filter, pd_acceleration, ssa_filter, Command, ControllerState,
    JerkPlan, MotionLimits,
};
use crate::error::{Error, Result};
use crate::geometry::{min_distance, CapsuleSet};
use crate::kinematics::{forward_kinematics, JointVector, LinkCapsule, RobotModel};
use crate::perception::{
    average_frames, human_capsules_with_radii, load_skeleton_trajectory, SkeletonFrame,
};
use crate::task::{resolve_goal, step_stage, GoalContext, GoalRequest, Stage, TaskEventKind};

/// Deterministic fixed-step closed-loop simulation of one scenario.
///
/// The loop advances at the safety rate. Within a step the order is fixed:
/// perception (at its rate) -> task events -> tracking command (at the
/// command rate) -> safety filter -> integration. Skeleton frames are
/// consumed only once their timestamp has passed (zero-order hold).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunLog> {
    cfg.validate()?;
    let base_model = cfg.model()?;
    let limits = cfg.motion_limits(&base_model);
    let frames = load_skeleton_trajectory(&cfg.skeleton_path)?;

    let dt = 1.0 / cfg.rates.safety;
    let cmd_every = (cfg.rates.safety / cfg.rates.command).round().max(1.0) as usize;
    let per_every = (cfg.rates.safety / cfg.rates.perception).round().max(1.0) as usize;
    let n_steps = (cfg.duration * cfg.rates.safety).round() as usize;

    let mut sim = Engine {
        cfg,
        base_model: base_model.clone(),
        active_model: base_model,
        move_limits: limits.clone(),
        move_scaled: false,
        limits,
        frames,
        consumed: 0,
        env: CapsuleSet::new(),
        state: ControllerState::at_rest(cfg.home_q.clone(), 0.0),
        stage: Stage::Idle,
        next_event: 0,
        goal: None,
        final_goal: None,
        delivery_retreat: None,
        plan: None,
        u_nominal: DVector::zeros(cfg.home_q.len()),
        goal_counter: 0,
        log: RunLog {
            scenario: cfg.name.clone(),
            rows: Vec::new(),
            goals: Vec::new(),
            stage_timeline: vec![StageSpan {
                stage: Stage::Idle.name().to_string(),
                t_start: 0.0,
                t_end: 0.0,
            }],
            max_tracking_error: 0.0,
            complete: false,
        },
        intervened_since_row: false,
        clamps_since_row: 0,
        brake_latch: false,
    };

    for k in 0..n_steps {
        let t = k as f64 * dt;
        sim.state.t = t;

        if k % per_every == 0 {
            sim.perceive(t);
        }
        if let Err(e) = sim.process_events(t) {
            // Partial log, flagged incomplete.
            sim.push_row(t);
            return match e {
                fatal @ Error::IllegalTransition { .. } => Err(fatal),
                other => {
                    eprintln!("scenario {} aborted: {other}", cfg.name);
                    Ok(sim.log)
                }
            };
        }
        if k % cmd_every == 0 {
            sim.push_row(t);
            sim.update_command(t)?;
        }
        sim.apply_safety_and_integrate(dt)?;
    }
    sim.state.t = cfg.duration;
    sim.push_row(cfg.duration);
    sim.log.stage_timeline.last_mut().unwrap().t_end = cfg.duration;
    sim.log.complete = true;
    Ok(sim.log)
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    base_model: RobotModel,
    /// Base model, plus the carried-object capsule while grasped.
    active_model: RobotModel,
    /// Full actuator limits; the filters and integrator always use these.
    limits: MotionLimits,
    /// Limits for the current move's plan and tracking. Velocity and
    /// acceleration are scaled down when the goal sits close to the human,
    /// so the nominal never carries momentum the clearance cannot absorb.
    move_limits: MotionLimits,
    /// Whether `move_limits` is currently the scaled-down set.
    move_scaled: bool,
    frames: Vec<SkeletonFrame>,
    consumed: usize,
    env: CapsuleSet,
    state: ControllerState,
    stage: Stage,
    next_event: usize,
    /// Current move target (the approach waypoint first, if any).
    goal: Option<JointVector>,
    /// Stage goal still to be visited after the current waypoint.
    final_goal: Option<JointVector>,
    /// Delivery approach configuration, kept so the departure retreats
    /// back through it before swinging away from the human.
    delivery_retreat: Option<JointVector>,
    plan: Option<JerkPlan>,
    /// Held nominal command (jerk or acceleration, by pipeline).
    u_nominal: JointVector,
    goal_counter: i64,
    log: RunLog,
    intervened_since_row: bool,
    clamps_since_row: usize,
    /// Braking-cap hysteresis state fed back to the safety filter.
    brake_latch: bool,
}

impl Engine<'_> {
    /// Consume every skeleton frame whose timestamp has passed and rebuild
    /// the environment capsules from the freshest one.
    fn perceive(&mut self, t: f64) {
        let mut advanced = false;
        while self.consumed < self.frames.len() && self.frames[self.consumed].t <= t + 1e-12 {
            self.consumed += 1;
            advanced = true;
        }
        if advanced {
            // Smooth the collision envelope over the last few frames; raw
            // detection jitter would otherwise teleport the body capsules
            // between perception ticks. Goal resolution and the uncertainty
            // statistics still see the raw frames.
            let lo = self.consumed.saturating_sub(self.cfg.smooth_window);
            if let Some(frame) = average_frames(&self.frames[lo..self.consumed]) {
                if let Ok(set) = human_capsules_with_radii(&frame, &self.cfg.body_radii) {
                    self.env = set;
                }
            }
        }
    }

    fn tracking_error(&self) -> f64 {
        match &self.goal {
            Some(q_g) => (&self.state.q - q_g).amax(),
            None => 0.0,
        }
    }

    fn stage_complete(&self) -> bool {
        if self.final_goal.is_some() {
            return false;
        }
        match self.goal {
            Some(_) => self.tracking_error() <= self.cfg.tracking.completion_tol,
            None => true,
        }
    }

    fn process_events(&mut self, t: f64) -> Result<()> {
        if self.next_event >= self.cfg.events.len() {
            return Ok(());
        }
        let event = self.cfg.events[self.next_event];
        if t < event.t || !self.stage_complete() {
            return Ok(());
        }
        self.next_event += 1;

        match event.kind {
            TaskEventKind::ObjectGrasped | TaskEventKind::HumanReturnedObject => {
                self.attach_object()
            }
            TaskEventKind::HumanTookObject | TaskEventKind::ObjectPlaced => self.detach_object(),
            _ => {}
        }

        let (next_stage, request) = step_stage(self.stage, &event, self.cfg.return_required)?;
        if next_stage != self.stage {
            self.log.stage_timeline.last_mut().unwrap().t_end = t;
            self.log.stage_timeline.push(StageSpan {
                stage: next_stage.name().to_string(),
                t_start: t,
                t_end: t,
            });
            self.stage = next_stage;
        }

        if let Some(request) = request {
            let adapt = AdaptParams {
                rng_seed: self.cfg.rng_seed.wrapping_add(self.goal_counter as u64),
                ..self.cfg.adapt.clone()
            };
            let window = &self.frames[..self.consumed];
            let ctx = GoalContext {
                model: &self.active_model,
                frames: window,
                env: &self.env,
                delivery: &self.cfg.delivery,
                goal_adapt: &self.cfg.goal_adapt,
                adapt: &adapt,
                stats_window: self.cfg.stats_window,
                object_pose: &self.cfg.object_pose,
                object_return_pose: &self.cfg.object_return_pose,
                home_configuration: &self.cfg.home_q,
                q_seed: &self.state.q,
            };
            let resolved = resolve_goal(&request, &ctx)?;
            let id = self.goal_counter;
            self.goal_counter += 1;
            self.log.goals.push(GoalRecord {
                id,
                stage: self.stage.name().to_string(),
                t,
                q_g: resolved.q_g.iter().cloned().collect(),
                position: resolved
                    .cartesian
                    .as_ref()
                    .map(|p| [p.position.x, p.position.y, p.position.z]),
            });
            // Waypoint order: a Deliver goal approaches through its
            // retreated configuration; the move leaving the handover pose
            // retreats back through it first.
            let waypoint = match &request {
                GoalRequest::Delivery => {
                    self.delivery_retreat = resolved.approach.clone();
                    resolved.approach.clone()
                }
                _ => self.delivery_retreat.take(),
            };
            match waypoint {
                Some(pre) => {
                    self.final_goal = Some(resolved.q_g.clone());
                    self.start_move(pre)?;
                }
                None => {
                    self.final_goal = None;
                    self.start_move(resolved.q_g.clone())?;
                }
            }
        } else if self.stage == Stage::Idle {
            self.goal = None;
            self.final_goal = None;
            self.plan = None;
        }
        Ok(())
    }

    /// Make `q_g` the current move target and (re)plan toward it.
    fn start_move(&mut self, q_g: JointVector) -> Result<()> {
        self.move_scaled = self.move_needs_scaling(&q_g, 0.0)?;
        self.move_limits = if self.move_scaled {
            self.scaled_limits()
        } else {
            self.limits.clone()
        };
        if self.cfg.pipeline == Pipeline::PreplannedJerk {
            self.plan = Some(jpc_plan(
                &self.state,
                &q_g,
                &self.move_limits,
                self.cfg.rates.command,
            )?);
        }
        self.goal = Some(q_g);
        Ok(())
    }

    fn attach_object(&mut self) {
        let mut model = self.base_model.clone();
        let tool = model.tool;
        let dir = if tool.norm() > 1e-9 {
            tool.normalize()
        } else {
            nalgebra::Vector3::z()
        };
        model.link_capsules.push(LinkCapsule {
            link: model.dof(),
            a: Point3::from(tool),
            b: Point3::from(tool + dir * self.cfg.object_length),
            radius: self.cfg.object_radius,
        });
        self.active_model = model;
    }

    fn detach_object(&mut self) {
        self.active_model = self.base_model.clone();
    }

    /// Speed-and-separation test: true when the move from the current
    /// state to `q_g` starts or ends within `approach_clearance + slack`
    /// of the human.
    fn move_needs_scaling(&self, q_g: &JointVector, slack: f64) -> Result<bool> {
        if self.env.is_empty() {
            return Ok(false);
        }
        let clearance = min_distance(&self.active_model, q_g, &self.env)?
            .distance
            .min(min_distance(&self.active_model, &self.state.q, &self.env)?.distance);
        Ok(clearance < self.cfg.tracking.approach_clearance + slack)
    }

    fn scaled_limits(&self) -> MotionLimits {
        let s = self.cfg.tracking.approach_scale;
        MotionLimits {
            v_max: &self.limits.v_max * s,
            a_max: &self.limits.a_max * s,
            j_max: self.limits.j_max.clone(),
        }
    }

    /// Refresh the held nominal command at the command rate.
    fn update_command(&mut self, t: f64) -> Result<()> {
        // Waypoint reached: move on to the stage goal.
        if self.final_goal.is_some()
            && self.goal.is_some()
            && self.tracking_error() <= self.cfg.tracking.completion_tol
        {
            let q_g = self.final_goal.take().unwrap();
            self.start_move(q_g)?;
        }
        // Re-evaluate speed-and-separation mid-move (with hysteresis):
        // a leg that started near the human regains full speed once both
        // the state and the goal are well clear, and vice versa.
        if let Some(q_g) = self.goal.clone() {
            let needed = self.move_needs_scaling(&q_g, if self.move_scaled { 0.05 } else { 0.0 })?;
            if needed != self.move_scaled {
                self.start_move(q_g)?;
            }
        }
        match self.cfg.pipeline {
            Pipeline::PreplannedJerk => {
                // Replan whenever the state has fallen off the plan (the
                // filter held us back) or the plan ran out short of the
                // goal. Re-seeding from the current state keeps the nominal
                // inside the move limits; letting the servo catch up to a
                // reference that marched on would demand unbounded speed.
                if let (Some(plan), Some(q_g)) = (&self.plan, &self.goal) {
                    let local = t - plan.t0;
                    let off_plan = self.reference_error(t) > 0.02;
                    let exhausted = local > plan.duration
                        && (self.tracking_error() > 0.05 || self.state.dq.amax() > 0.05);
                    if off_plan || exhausted {
                        self.plan = Some(jpc_plan(
                            &self.state,
                            q_g,
                            &self.move_limits,
                            self.cfg.rates.command,
                        )?);
                    }
                }
                // Feedforward plan jerk plus servo feedback on the plan
                // state. Open-loop jerk execution is unstable to the
                // perturbations the safety filter injects (position error
                // grows cubically), so the stream is tracked like a robot's
                // internal servo would.
                let dof = self.state.dof();
                let (q_ref, dq_ref, ddq_ref, j_ff) = match &self.plan {
                    Some(plan) => {
                        let local = t - plan.t0;
                        let (q, dq, ddq) = plan.state_at(local);
                        let j = if local <= plan.duration {
                            plan.jerk_at(local)
                        } else {
                            DVector::zeros(dof)
                        };
                        (q, dq, ddq, j)
                    }
                    // No active plan: bleed off any residual motion.
                    None => (
                        self.state.q.clone(),
                        DVector::zeros(dof),
                        DVector::zeros(dof),
                        DVector::zeros(dof),
                    ),
                };
                let w = self.cfg.tracking.jerk_bandwidth;
                let (kp, kv, ka) = (w * w * w, 3.0 * w * w, 3.0 * w);
                let mut u = j_ff
                    + (q_ref - &self.state.q) * kp
                    + (dq_ref - &self.state.dq) * kv
                    + (ddq_ref - &self.state.ddq) * ka;
                for i in 0..dof {
                    u[i] = u[i].clamp(-self.move_limits.j_max[i], self.move_limits.j_max[i]);
                }
                self.u_nominal = u;
            }
            Pipeline::FeedbackAccel => {
                self.u_nominal = match &self.goal {
                    Some(q_g) => pd_acceleration(
                        &self.state,
                        q_g,
                        self.cfg.tracking.kp,
                        self.cfg.tracking.kd,
                        &self.move_limits,
                    ),
                    None => DVector::zeros(self.state.dof()),
                };
            }
        }
        Ok(())
    }

    /// Filter the held command against the freshest environment and
    /// integrate one safety step.
    fn apply_safety_and_integrate(&mut self, dt: f64) -> Result<()> {
        let command = if self.env.is_empty() {
            match self.cfg.pipeline {
                Pipeline::PreplannedJerk => Command::Jerk(self.u_nominal.clone()),
                Pipeline::FeedbackAccel => Command::Accel(self.u_nominal.clone()),
            }
        } else {
            match self.cfg.pipeline {
                Pipeline::PreplannedJerk => {
                    match jssa_filter(
                        &self.u_nominal,
                        &self.active_model,
                        &self.state,
                        &self.env,
                        &self.cfg.safety,
                        &self.limits,
                        self.brake_latch,
                    ) {
                        Ok(out) => {
                            self.intervened_since_row |= out.intervened;
                            self.brake_latch = out.braking;
                            Command::Jerk(out.command)
                        }
                        Err(Error::InfeasibleSafeControl) => {
                            self.intervened_since_row = true;
                            Command::Jerk(self.max_braking_jerk())
                        }
                        Err(e) => return Err(e),
                    }
                }
                Pipeline::FeedbackAccel => {
                    match ssa_filter(
                        &self.u_nominal,
                        &self.active_model,
                        &self.state,
                        &self.env,
                        &self.cfg.safety,
                        &self.limits,
                        self.brake_latch,
                    ) {
                        Ok(out) => {
                            self.intervened_since_row |= out.intervened;
                            self.brake_latch = out.braking;
                            Command::Accel(out.command)
                        }
                        Err(Error::InfeasibleSafeControl) => {
                            self.intervened_since_row = true;
                            Command::Accel(self.max_braking_accel())
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        let (next, clamps) = integrate_step(&self.state, &command, dt, &self.limits);
        self.clamps_since_row += clamps;
        self.state = next;
        Ok(())
    }

    /// Degenerate-gradient fallback: bleed off motion as fast as allowed.
    fn max_braking_jerk(&self) -> JointVector {
        let mut j = DVector::zeros(self.state.dof());
        for i in 0..j.len() {
            let tendency = self.state.ddq[i] + self.state.dq[i];
            if tendency.abs() > 1e-9 {
                j[i] = -tendency.signum() * self.limits.j_max[i];
            }
        }
        j
    }

    fn max_braking_accel(&self) -> JointVector {
        let mut a = DVector::zeros(self.state.dof());
        for i in 0..a.len() {
            if self.state.dq[i].abs() > 1e-9 {
                a[i] = -self.state.dq[i].signum() * self.limits.a_max[i];
            }
        }
        a
    }

    fn push_row(&mut self, t: f64) {
        let fk = forward_kinematics(&self.active_model, &self.state.q)
            .expect("state dimension matches model");
        let dist = if self.env.is_empty() {
            f64::INFINITY
        } else {
            min_distance(&self.active_model, &self.state.q, &self.env)
                .map(|m| m.distance)
                .unwrap_or(f64::INFINITY)
        };
        let tracking_error = self.reference_error(t);
        if tracking_error > self.log.max_tracking_error {
            self.log.max_tracking_error = tracking_error;
        }
        self.log.rows.push(LogRow {
            t,
            min_distance: dist,
            q: self.state.q.iter().cloned().collect(),
            dq: self.state.dq.iter().cloned().collect(),
            ddq: self.state.ddq.iter().cloned().collect(),
            ee: [fk.ee.position.x, fk.ee.position.y, fk.ee.position.z],
            stage: self.stage,
            goal_id: self.goal_counter - 1,
            filter_intervened: self.intervened_since_row,
            clamp_events: self.clamps_since_row,
        });
        self.intervened_since_row = false;
        self.clamps_since_row = 0;
        self.log.stage_timeline.last_mut().unwrap().t_end = t;
    }

    /// Error against the streamed reference (the plan position for the
    /// jerk pipeline, the joint goal for the feedback pipeline).
    fn reference_error(&self, t: f64) -> f64 {
        match self.cfg.pipeline {
            Pipeline::PreplannedJerk => match &self.plan {
                Some(plan) => {
                    let (q_ref, _, _) = plan.state_at(t - plan.t0);
                    (&self.state.q - q_ref).amax()
                }
                None => 0.0,
            },
            Pipeline::FeedbackAccel => self.tracking_error(),
        }
    }
}
