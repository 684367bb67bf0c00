use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tshc_core::checkpoint::write_atomic;
use tshc_core::tasks::{mirror_pose, mirror_task, nearest_goal_lookup, read_task_list};
use tshc_core::trainer::{rollout, PendulumSample};
use tshc_core::{
    Checkpoint, EnvKind, RolloutOptions, RolloutResult, Score, Task, Trajectory, VehicleState,
};

use crate::config::{Dim, Qty};

pub struct Args {
    pub checkpoint: PathBuf,
    pub task: Option<String>,
    pub setpoint: Option<String>,
    pub mirror: bool,
    pub tasks: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct ReplaySummary {
    #[serde(rename = "F")]
    pub f: u8,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "J")]
    pub j: Score,
    pub steps: usize,
}

pub const VEHICLE_HEADER: &str = "t,x,y,psi,v,delta";
pub const PENDULUM_HEADER: &str = "t,p,p_dot,theta,theta_dot,force";

/// `x,y,psi,v` with optional unit suffixes; bare numbers are SI.
pub fn parse_setpoint(s: &str) -> Result<[f64; 4]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        bail!("setpoint needs four comma-separated values x,y,psi,v, got `{s}`");
    }
    let dims = [Dim::Length, Dim::Length, Dim::Angle, Dim::Speed];
    let mut out = [0.0; 4];
    for ((slot, part), dim) in out.iter_mut().zip(&parts).zip(dims) {
        let q: Qty = part.parse().map_err(anyhow::Error::msg)?;
        *slot = q
            .get(dim)
            .map_err(|e| anyhow::anyhow!("setpoint entry `{}`: {e}", part.trim()))?;
    }
    Ok(out)
}

fn find_task<'a>(tasks: &'a [Task], id: &str) -> Result<&'a Task> {
    tasks
        .iter()
        .find(|t| t.id == id)
        .with_context(|| format!("no task with id `{id}`"))
}

/// Task to run and whether to run it mirrored.
fn resolve(ck: &Checkpoint, args: &Args, pool: &[Task]) -> Result<(Task, bool)> {
    if let Some(id) = &args.task {
        let task = find_task(pool, id)?;
        return Ok(if args.mirror {
            (mirror_task(task), true)
        } else {
            (task.clone(), false)
        });
    }
    let raw = args
        .setpoint
        .as_deref()
        .expect("clap requires task or setpoint");
    let mut setpoint = parse_setpoint(raw)?;
    setpoint[2] = tshc_core::dynamics::wrap_angle(setpoint[2]);
    if ck.layer_sizes.output_dim() != 2 {
        bail!("setpoints apply to vehicle checkpoints only");
    }
    let reflect = args.mirror && setpoint[2] < 0.0;
    let query = if reflect {
        mirror_pose(&setpoint)
    } else {
        setpoint
    };
    let tuple = nearest_goal_lookup(&query, &ck.goal_tuples, &ck.lookup)?;
    let mut task = find_task(&ck.tasks, &tuple.task_id)?.clone();
    task.z_goal = tuple.goal;
    Ok(if reflect {
        (mirror_task(&task), true)
    } else {
        (task, false)
    })
}

pub fn vehicle_csv(states: &[VehicleState], ts: f64) -> String {
    let mut out = String::from(VEHICLE_HEADER);
    out.push('\n');
    for s in states {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t as f64 * ts,
            s.x,
            s.y,
            s.psi,
            s.v_prev,
            s.delta_prev
        );
    }
    out
}

pub fn pendulum_csv(samples: &[PendulumSample], ts: f64) -> String {
    let mut out = String::from(PENDULUM_HEADER);
    out.push('\n');
    for PendulumSample { state: s, force } in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t as f64 * ts,
            s.p,
            s.p_dot,
            s.theta,
            s.theta_dot,
            force
        );
    }
    out
}

/// Rolls `task` out with the checkpoint's parameters and environment.
pub fn replay_task(ck: &Checkpoint, task: &Task, mirror: bool) -> Result<RolloutResult> {
    Ok(rollout(
        &ck.theta,
        &ck.layer_sizes,
        task,
        &ck.environment,
        &ck.config,
        RolloutOptions {
            record: true,
            mirror,
        },
    )?)
}

pub fn trajectory_csv(ck: &Checkpoint, task: &Task, result: &RolloutResult) -> String {
    match (&result.trajectory, task.env) {
        (Some(Trajectory::Vehicle(states)), _) => vehicle_csv(states, ck.environment.vehicle.ts),
        (Some(Trajectory::Pendulum(samples)), _) => {
            pendulum_csv(samples, ck.environment.pendulum.ts)
        }
        (None, EnvKind::Vehicle) => format!("{VEHICLE_HEADER}\n"),
        (None, EnvKind::Pendulum) => format!("{PENDULUM_HEADER}\n"),
    }
}

pub fn run(args: &Args) -> Result<()> {
    let ck = Checkpoint::load(&args.checkpoint)
        .with_context(|| format!("cannot load checkpoint {}", args.checkpoint.display()))?;
    let pool = match &args.tasks {
        Some(path) => {
            read_task_list(path).with_context(|| format!("cannot read {}", path.display()))?
        }
        None => ck.tasks.clone(),
    };
    let (task, mirror) = resolve(&ck, args, &pool)?;
    let result = replay_task(&ck, &task, mirror)?;

    let dir = crate::output_dir(args.out_dir.as_deref(), None);
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let stem = format!("replay-seed{}-{}", ck.seed, task.id);
    let csv = trajectory_csv(&ck, &task, &result);
    let summary = ReplaySummary {
        f: result.solved.into(),
        p: result.pathlength,
        j: result.ret,
        steps: result.steps,
    };
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_atomic(&csv_path, csv.as_bytes())?;
    write_atomic(
        &json_path,
        (serde_json::to_string_pretty(&summary)? + "\n").as_bytes(),
    )?;
    eprintln!(
        "task {}{}: F={} P={} J={} steps={}; wrote {}",
        task.id,
        if mirror { " (mirrored)" } else { "" },
        summary.f,
        summary.p,
        summary.j,
        summary.steps,
        csv_path.display()
    );
    Ok(())
}
