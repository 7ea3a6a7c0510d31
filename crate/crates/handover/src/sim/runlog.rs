use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::task::Stage;

/// One logged sample at the command rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    /// Minimum human-robot clearance, m.
    pub min_distance: f64,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub ddq: Vec<f64>,
    /// End-effector position, m.
    pub ee: [f64; 3],
    pub stage: Stage,
    /// Index into `goals`, or -1 when no goal is active.
    pub goal_id: i64,
    /// True when the safety filter modified a command since the last row.
    pub filter_intervened: bool,
    /// Velocity/acceleration clamping events since the last row.
    pub clamp_events: usize,
}

/// A goal resolved during the run.
#[derive(Debug, Clone, Serialize)]
pub struct GoalRecord {
    pub id: i64,
    pub stage: String,
    pub t: f64,
    pub q_g: Vec<f64>,
    /// Cartesian target position when the goal came from a pose, m.
    pub position: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageSpan {
    pub stage: String,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub complete: bool,
    pub duration: f64,
    pub min_distance: f64,
    pub max_tracking_error: f64,
    pub filter_interventions: usize,
    pub clamp_events: usize,
    pub stages: Vec<StageSpan>,
}

/// Timestamped metrics of one simulated run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub scenario: String,
    pub rows: Vec<LogRow>,
    pub goals: Vec<GoalRecord>,
    pub stage_timeline: Vec<StageSpan>,
    pub max_tracking_error: f64,
    /// False when the run aborted on an error.
    pub complete: bool,
}

impl RunLog {
    pub fn min_distance(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.min_distance)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            scenario: self.scenario.clone(),
            complete: self.complete,
            duration: self.rows.last().map(|r| r.t).unwrap_or(0.0),
            min_distance: self.min_distance(),
            max_tracking_error: self.max_tracking_error,
            filter_interventions: self.rows.iter().filter(|r| r.filter_intervened).count(),
            clamp_events: self.rows.iter().map(|r| r.clamp_events).sum(),
            stages: self.stage_timeline.clone(),
        }
    }

    /// Tab-delimited series table. Columns, in order:
    /// `t  min_distance  stage  goal_id  filter  clamps  ee_x  ee_y  ee_z`
    /// then `q_0..q_{n-1}  dq_0..  ddq_0..`.
    pub fn write_table(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let dof = self.rows.first().map(|r| r.q.len()).unwrap_or(0);
        out.push_str("t\tmin_distance\tstage\tgoal_id\tfilter\tclamps\tee_x\tee_y\tee_z");
        for prefix in ["q", "dq", "ddq"] {
            for i in 0..dof {
                out.push_str(&format!("\t{prefix}_{i}"));
            }
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:.9}\t{:.9e}\t{}\t{}\t{}\t{}\t{:.9e}\t{:.9e}\t{:.9e}",
                r.t,
                r.min_distance,
                r.stage.name(),
                r.goal_id,
                r.filter_intervened as u8,
                r.clamp_events,
                r.ee[0],
                r.ee[1],
                r.ee[2]
            ));
            for series in [&r.q, &r.dq, &r.ddq] {
                for v in series {
                    out.push_str(&format!("\t{v:.12e}"));
                }
            }
            out.push('\n');
        }
        write_file(path, out.as_bytes())
    }

    /// Structured JSON summary (stage timeline, goals, aggregates).
    pub fn write_summary(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct SummaryFile<'a> {
            #[serde(flatten)]
            summary: Summary,
            goals: &'a [GoalRecord],
        }
        let payload = SummaryFile {
            summary: self.summary(),
            goals: &self.goals,
        };
        let text = serde_json::to_string_pretty(&payload).map_err(|e| Error::Parse {
            context: "summary serialization".into(),
            message: e.to_string(),
        })?;
        write_file(path, text.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    f.write_all(bytes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Differences between two completed runs.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    /// Per-stage duration difference (a minus b), s; only stages present
    /// in both timelines at the same position.
    pub stage_duration_deltas: Vec<(String, f64)>,
    /// Stages that do not line up between the two timelines.
    pub incomparable_stages: Vec<String>,
    /// Largest gap between the min-distance profiles over the common
    /// prefix, m.
    pub min_distance_max_gap: f64,
    /// Distance between corresponding Cartesian goal positions, m.
    pub goal_position_deltas: Vec<f64>,
}

/// Compare two completed runs stage by stage.
pub fn compare_runs(a: &RunLog, b: &RunLog) -> Result<DivergenceReport> {
    if !a.complete || !b.complete {
        return Err(Error::IncompleteLog);
    }
    let mut stage_duration_deltas = Vec::new();
    let mut incomparable = Vec::new();
    let n = a.stage_timeline.len().max(b.stage_timeline.len());
    for i in 0..n {
        match (a.stage_timeline.get(i), b.stage_timeline.get(i)) {
            (Some(sa), Some(sb)) if sa.stage == sb.stage => {
                let da = sa.t_end - sa.t_start;
                let db = sb.t_end - sb.t_start;
                stage_duration_deltas.push((sa.stage.clone(), da - db));
            }
            (Some(sa), Some(sb)) => {
                incomparable.push(format!("{} vs {}", sa.stage, sb.stage));
            }
            (Some(sa), None) => incomparable.push(format!("{} vs -", sa.stage)),
            (None, Some(sb)) => incomparable.push(format!("- vs {}", sb.stage)),
            (None, None) => {}
        }
    }
    let common = a.rows.len().min(b.rows.len());
    let min_distance_max_gap = (0..common)
        .map(|i| (a.rows[i].min_distance - b.rows[i].min_distance).abs())
        .fold(0.0, f64::max);
    let goals = a.goals.len().min(b.goals.len());
    let goal_position_deltas = (0..goals)
        .filter_map(|i| match (&a.goals[i].position, &b.goals[i].position) {
            (Some(pa), Some(pb)) => Some(
                ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2))
                    .sqrt(),
            ),
            _ => None,
        })
        .collect();
    Ok(DivergenceReport {
        stage_duration_deltas,
        incomparable_stages: incomparable,
        min_distance_max_gap,
        goal_position_deltas,
    })
}
