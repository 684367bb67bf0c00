//! Training tasks, feature vectors, control mirroring and the goal-tuple store.
//!
//! States are carried as 4-vectors: `[x, y, psi, v]` for the vehicle and
//! `[p, p_dot, theta, theta_dot]` for the cart-pole.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::wrap_angle;
use crate::error::{Error, Result};
use crate::reward::{pose_errors, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Vehicle,
    Pendulum,
}

impl EnvKind {
    /// Number of network outputs the environment consumes.
    pub fn control_dim(self) -> usize {
        match self {
            EnvKind::Vehicle => 2,
            EnvKind::Pendulum => 1,
        }
    }
}

/// How the network input is built from the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRecipe {
    /// Normalized goal differences `[dx, dy, dpsi, dv]`.
    GoalDelta4,
    /// `GoalDelta4` plus the previous raw steering output.
    GoalDelta5,
    /// Normalized cart-pole state.
    PendulumState,
}

impl FeatureRecipe {
    pub fn dim(self) -> usize {
        match self {
            FeatureRecipe::GoalDelta4 | FeatureRecipe::PendulumState => 4,
            FeatureRecipe::GoalDelta5 => 5,
        }
    }

    pub fn env(self) -> EnvKind {
        match self {
            FeatureRecipe::GoalDelta4 | FeatureRecipe::GoalDelta5 => EnvKind::Vehicle,
            FeatureRecipe::PendulumState => EnvKind::Pendulum,
        }
    }
}

/// Divisors applied to raw feature values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub dx: f64,
    pub dy: f64,
    pub dpsi: f64,
    pub dv: f64,
    /// `[p, p_dot, theta, theta_dot]` divisors.
    pub pendulum: [f64; 4],
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            dx: 20.0,
            dy: 20.0,
            dpsi: PI,
            dv: 10.0,
            pendulum: [2.4, 3.0, PI, 4.0 * PI],
        }
    }
}

impl Normalization {
    pub fn validate(&self) -> Result<()> {
        let all = [self.dx, self.dy, self.dpsi, self.dv]
            .into_iter()
            .chain(self.pendulum);
        for v in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "normalization constants must be positive, got {self:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub id: String,
    pub env: EnvKind,
    pub z0: [f64; 4],
    pub z_goal: [f64; 4],
    pub tolerances: Tolerances,
    /// Overrides the trainer's horizon for this task.
    #[serde(default)]
    pub t_max: Option<usize>,
    pub recipe: FeatureRecipe,
}

impl Task {
    pub fn validate(&self) -> Result<()> {
        if !self.z0.iter().chain(&self.z_goal).all(|v| v.is_finite()) {
            return Err(Error::Config(format!(
                "task `{}`: non-finite state",
                self.id
            )));
        }
        self.tolerances
            .validate()
            .map_err(|e| Error::Config(format!("task `{}`: {e}", self.id)))?;
        if self.recipe.env() != self.env {
            return Err(Error::Config(format!(
                "task `{}`: recipe {:?} does not fit a {:?} environment",
                self.id, self.recipe, self.env
            )));
        }
        if self.t_max == Some(0) {
            return Err(Error::Config(format!(
                "task `{}`: t_max must be positive",
                self.id
            )));
        }
        Ok(())
    }

    /// Goal heading in `(-pi, pi]`.
    pub fn goal_heading(&self) -> f64 {
        wrap_angle(self.z_goal[2])
    }
}

/// Writes the network input for `state` into `out` (length `recipe.dim()`).
///
/// `last_raw_steer` is the steering channel of the previous raw network
/// output, before scaling; it is only read by the 5-feature recipe.
pub fn write_features(
    state: &[f64; 4],
    task: &Task,
    last_raw_steer: f64,
    norm: &Normalization,
    out: &mut [f64],
) {
    let g = &task.z_goal;
    match task.recipe {
        FeatureRecipe::GoalDelta4 | FeatureRecipe::GoalDelta5 => {
            out[0] = (g[0] - state[0]) / norm.dx;
            out[1] = (g[1] - state[1]) / norm.dy;
            out[2] = wrap_angle(g[2] - state[2]) / norm.dpsi;
            out[3] = (g[3] - state[3]) / norm.dv;
            if task.recipe == FeatureRecipe::GoalDelta5 {
                out[4] = last_raw_steer;
            }
        }
        FeatureRecipe::PendulumState => {
            for i in 0..4 {
                out[i] = state[i] / norm.pendulum[i];
            }
        }
    }
}

pub fn feature_vector(
    state: &[f64; 4],
    task: &Task,
    last_raw_steer: f64,
    norm: &Normalization,
) -> Vec<f64> {
    let mut out = vec![0.0; task.recipe.dim()];
    write_features(state, task, last_raw_steer, norm, &mut out);
    out
}

/// `z0 = [0, 0, 0, 0]` to `z_goal = [20, 0, pi/4, 0]`, four features.
pub fn navigation_task() -> Task {
    Task {
        id: "nav-20-0-45".into(),
        env: EnvKind::Vehicle,
        z0: [0.0; 4],
        z_goal: [20.0, 0.0, PI / 4.0, 0.0],
        tolerances: Tolerances::vehicle_default(),
        t_max: None,
        recipe: FeatureRecipe::GoalDelta4,
    }
}

/// Turn-on-the-spot tasks from rest at the origin to `[0, 0, psi_goal, 0]`
/// for `psi_goal = 0°, step°, ..., max°`.
pub fn heading_grid(step_deg: f64, max_deg: f64) -> Result<Vec<Task>> {
    if !(step_deg > 0.0 && step_deg <= max_deg && max_deg <= 180.0) {
        return Err(Error::Config(format!(
            "heading grid needs 0 < step <= max <= 180, got step={step_deg} max={max_deg}"
        )));
    }
    let count = (max_deg / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let deg = k as f64 * step_deg;
            Task {
                id: format!("heading-{deg:03}"),
                env: EnvKind::Vehicle,
                z0: [0.0; 4],
                z_goal: [0.0, 0.0, deg.to_radians(), 0.0],
                tolerances: Tolerances::vehicle_default(),
                t_max: None,
                recipe: FeatureRecipe::GoalDelta5,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PendulumTaskKind {
    Stabilize,
    Swingup,
    Both,
}

/// Pole angle tolerance for the upright goal.
pub fn pendulum_tolerances() -> Tolerances {
    // Only eps_psi is read for cart-pole goals.
    Tolerances {
        eps_d: 1.0,
        eps_psi: 12f64.to_radians(),
        eps_v: 1.0,
    }
}

pub fn pendulum_tasks(kind: PendulumTaskKind) -> Vec<Task> {
    let make = |id: &str, theta0: f64| Task {
        id: id.into(),
        env: EnvKind::Pendulum,
        z0: [0.0, 0.0, theta0, 0.0],
        z_goal: [0.0; 4],
        tolerances: pendulum_tolerances(),
        t_max: None,
        recipe: FeatureRecipe::PendulumState,
    };
    let stabilize = make("stabilize", 0.0);
    let swingup = make("swingup", PI);
    match kind {
        PendulumTaskKind::Stabilize => vec![stabilize],
        PendulumTaskKind::Swingup => vec![swingup],
        PendulumTaskKind::Both => vec![stabilize, swingup],
    }
}

/// Reflection about the x-axis: `[x, y, psi, v] -> [x, -y, -psi, v]`.
pub fn mirror_pose(z: &[f64; 4]) -> [f64; 4] {
    [z[0], -z[1], wrap_angle(-z[2]), z[3]]
}

pub fn mirror_task(task: &Task) -> Task {
    Task {
        id: format!("{}-mirrored", task.id),
        z0: mirror_pose(&task.z0),
        z_goal: mirror_pose(&task.z_goal),
        ..task.clone()
    }
}

/// True for vehicle goals with a negative wrapped heading, i.e. the ones a
/// network trained on non-negative headings serves through mirroring.
pub fn needs_mirror(task: &Task) -> bool {
    task.env == EnvKind::Vehicle && task.goal_heading() < 0.0
}

/// Reflects a vehicle feature vector in place: lateral and heading
/// differences and the previous steering output change sign.
pub fn mirror_features(features: &mut [f64], recipe: FeatureRecipe) {
    match recipe {
        FeatureRecipe::GoalDelta4 => {
            features[1] = -features[1];
            features[2] = -features[2];
        }
        FeatureRecipe::GoalDelta5 => {
            features[1] = -features[1];
            features[2] = -features[2];
            features[4] = -features[4];
        }
        FeatureRecipe::PendulumState => {}
    }
}

/// Raw vehicle outputs are `[v, delta]`; mirroring flips the steering sign
/// for goals that need it and leaves everything else alone.
pub fn mirror_control(task: &Task, raw: [f64; 2]) -> [f64; 2] {
    if needs_mirror(task) {
        [raw[0], -raw[1]]
    } else {
        raw
    }
}

/// Achieved terminal pose of a training task next to the goal that was
/// commanded to reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalTuple {
    pub task_id: String,
    pub achieved: [f64; 4],
    pub goal: [f64; 4],
}

/// Weights of the lookup distance `w_d*e_d + w_psi*e_psi + w_v*e_v`
/// (per m, per rad, per m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupWeights {
    pub w_d: f64,
    pub w_psi: f64,
    pub w_v: f64,
}

impl Default for LookupWeights {
    /// 1 per metre, 0.1 per degree, 1 per m/s.
    fn default() -> Self {
        Self {
            w_d: 1.0,
            w_psi: 0.1 * 180.0 / PI,
            w_v: 1.0,
        }
    }
}

/// Tuple whose achieved pose is closest to `setpoint`; ties go to the lower index.
pub fn nearest_goal_lookup<'a>(
    setpoint: &[f64; 4],
    store: &'a [GoalTuple],
    weights: &LookupWeights,
) -> Result<&'a GoalTuple> {
    let dist = |t: &GoalTuple| {
        let (e_d, e_psi, e_v) = pose_errors(setpoint, &t.achieved);
        weights.w_d * e_d + weights.w_psi * e_psi + weights.w_v * e_v
    };
    let mut best: Option<(&GoalTuple, f64)> = None;
    for t in store {
        let d = dist(t);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((t, d));
        }
    }
    best.map(|(t, _)| t).ok_or(Error::EmptyStore)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    tasks: Vec<Task>,
}

pub fn write_task_list(path: &Path, tasks: &[Task]) -> Result<()> {
    let body = serde_json::to_string_pretty(&TaskFile {
        tasks: tasks.to_vec(),
    })?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

pub fn read_task_list(path: &Path) -> Result<Vec<Task>> {
    let file: TaskFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    for t in &file.tasks {
        t.validate()?;
    }
    Ok(file.tasks)
}
