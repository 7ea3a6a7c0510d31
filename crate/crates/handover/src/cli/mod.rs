//! Command-line front end: run scenarios, inspect fixtures, solve the
//! delivery-pose adaptation standalone, and export profile tables.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::{DVector, Quaternion, UnitQuaternion, Vector3};

use crate::adaptation::{user_adapt, AdaptParams};
use crate::error::{Error, Result};
use crate::geometry::{min_distance, CapsuleSet};
use crate::kinematics::{builtin_model, builtin_model_ids, Pose};
use crate::perception::{keypoint_stats, load_skeleton_trajectory, Keypoint};
use crate::sim::{run_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "handover",
    about = "Safe human-robot handover simulation toolkit",
    long_about = "Runs handover scenarios through the five-stage pipeline and \
exports plot-ready profile tables.\n\nScenario files are TOML (see \
data/scenarios/), skeleton trajectories line-delimited JSON (see \
data/skeletons/), and environment files JSON capsule sets (see data/env/)."
)]
pub struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Simulate a scenario file (or every scenario in a directory) and
    /// write the run-log table and summary.
    Run {
        /// Scenario TOML file, or a directory of them.
        scenario: PathBuf,
        /// Output directory for <name>.tsv and <name>.summary.json.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Parallel scenario runs when the input is a directory.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Solve the delivery-pose adaptation standalone.
    Adapt {
        /// Bundled model id (see `models`).
        #[arg(long)]
        model: String,
        /// Goal position, m.
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
        position: Vec<f64>,
        /// Goal orientation quaternion.
        #[arg(long, num_args = 4, value_names = ["W", "X", "Y", "Z"],
              default_values_t = [1.0, 0.0, 0.0, 0.0], allow_negative_numbers = true)]
        orientation: Vec<f64>,
        /// JSON capsule-set file describing the environment.
        #[arg(long)]
        env: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda_omega: f64,
        #[arg(long, default_value_t = 300)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Windowed keypoint standard deviations of a skeleton trajectory.
    Stats {
        trajectory: PathBuf,
        #[arg(long, default_value = "right_wrist")]
        keypoint: String,
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
    /// List bundled robot models.
    Models,
    /// Schema and cross-reference check of a scenario file, no simulation.
    Validate { scenario: PathBuf },
}

/// Parse `args` and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own usage/help text.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            // One greppable line per failure, even when a wrapped parser
            // reports with embedded newlines.
            let msg: String = e
                .to_string()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("error[{}]: {msg}", e.class());
            1
        }
    }
}

fn execute(cmd: CliCommand) -> Result<()> {
    match cmd {
        CliCommand::Run {
            scenario,
            out,
            seed,
            jobs,
        } => run_cmd(&scenario, &out, seed, jobs),
        CliCommand::Adapt {
            model,
            position,
            orientation,
            env,
            alpha,
            lambda_omega,
            iters,
            seed,
        } => adapt_cmd(
            &model,
            &position,
            &orientation,
            &env,
            AdaptParams {
                alpha,
                lambda_omega,
                max_iters: iters,
                rng_seed: seed,
            },
        ),
        CliCommand::Stats {
            trajectory,
            keypoint,
            window,
        } => stats_cmd(&trajectory, &keypoint, window),
        CliCommand::Models => {
            for id in builtin_model_ids() {
                let model = builtin_model(id)?;
                println!(
                    "{id}  dof={}  capsules={}",
                    model.dof(),
                    model.link_capsules.len()
                );
            }
            Ok(())
        }
        CliCommand::Validate { scenario } => {
            ScenarioConfig::load(&scenario)?;
            println!("ok: {}", scenario.display());
            Ok(())
        }
    }
}

fn run_cmd(scenario: &Path, out: &Path, seed: Option<u64>, jobs: usize) -> Result<()> {
    let paths: Vec<PathBuf> = if scenario.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(scenario)
            .map_err(|e| Error::Io {
                path: scenario.display().to_string(),
                source: e,
            })?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map(|x| x == "toml").unwrap_or(false))
            .collect();
        v.sort();
        v
    } else if scenario.exists() {
        vec![scenario.to_path_buf()]
    } else {
        return Err(Error::Config(format!(
            "scenario not found: {}",
            scenario.display()
        )));
    };

    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;

    let run_one = |path: &Path| -> Result<String> {
        let mut cfg = ScenarioConfig::load(path)?;
        if let Some(s) = seed {
            cfg.rng_seed = s;
            cfg.adapt.rng_seed = s;
        }
        let log = run_scenario(&cfg)?;
        log.write_table(&out.join(format!("{}.tsv", cfg.name)))?;
        log.write_summary(&out.join(format!("{}.summary.json", cfg.name)))?;
        let summary = log.summary();
        let stages: Vec<String> = summary
            .stages
            .iter()
            .map(|s| format!("{}={:.2}s", s.stage, s.t_end - s.t_start))
            .collect();
        Ok(format!(
            "{}: min_distance={:.4} m  complete={}  stages[{}]",
            cfg.name,
            summary.min_distance,
            summary.complete,
            stages.join(" ")
        ))
    };

    if jobs > 1 && paths.len() > 1 {
        let results: Vec<Result<String>> = std::thread::scope(|scope| {
            let handles: Vec<_> = paths
                .iter()
                .map(|p| scope.spawn(move || run_one(p)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for r in results {
            println!("{}", r?);
        }
    } else {
        for p in &paths {
            println!("{}", run_one(p)?);
        }
    }
    Ok(())
}

fn adapt_cmd(
    model_id: &str,
    position: &[f64],
    orientation: &[f64],
    env_path: &Path,
    params: AdaptParams,
) -> Result<()> {
    let model = builtin_model(model_id)?;
    let goal = Pose::new(
        Vector3::new(position[0], position[1], position[2]),
        UnitQuaternion::from_quaternion(Quaternion::new(
            orientation[0],
            orientation[1],
            orientation[2],
            orientation[3],
        )),
    );
    let text = std::fs::read_to_string(env_path).map_err(|e| Error::Io {
        path: env_path.display().to_string(),
        source: e,
    })?;
    let env: CapsuleSet = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: env_path.display().to_string(),
        message: e.to_string(),
    })?;

    if env.is_empty() {
        let q_seed = crate::kinematics::inverse_kinematics(
            &model,
            &goal,
            &DVector::zeros(model.dof()),
            &crate::kinematics::IkParams::default(),
        )
        .map_err(|e| Error::IkFailed(e.to_string()))?;
        println!("no obstacles; seed returned");
        println!("q_G = {}", fmt_vec(&q_seed));
        return Ok(());
    }

    let started = Instant::now();
    let result = user_adapt(&model, &goal, &env, &params)?;
    let elapsed = started.elapsed();

    let q_seed = crate::kinematics::inverse_kinematics(
        &model,
        &goal,
        &DVector::zeros(model.dof()),
        &crate::kinematics::IkParams::default(),
    )
    .map_err(|e| Error::IkFailed(e.to_string()))?;
    let d_before = min_distance(&model, &q_seed, &env)?.distance;

    println!("q_G = {}", fmt_vec(&q_seed));
    println!("q_g = {}", fmt_vec(&result.q_g));
    println!("d_before = {:.6} m", d_before);
    println!("d_after  = {:.6} m", result.clearance);
    println!("V = {:.6}", result.objective);
    println!("e_omega = {:.6} rad", result.orientation_error);
    if result.no_null_space {
        println!("note: no position null space; seed returned");
    }
    println!("wall_time = {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn stats_cmd(trajectory: &Path, keypoint: &str, window: usize) -> Result<()> {
    let frames = load_skeleton_trajectory(trajectory)?;
    let kp = Keypoint::parse(keypoint)
        .ok_or_else(|| Error::Config(format!("unknown keypoint {keypoint:?}")))?;
    let (estimate, mean) = keypoint_stats(&frames, kp, window)?;
    println!("keypoint: {}", kp.name());
    println!("window:   {} frames", estimate.window);
    println!("axis  sigma_m        mean_m");
    for (axis, i) in [("x", 0), ("y", 1), ("z", 2)] {
        println!("{axis}     {:<13.9} {:<13.9}", estimate.sigma[i], mean[i]);
    }
    Ok(())
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}
