//! Self-describing JSON checkpoints.
//!
//! A checkpoint carries the network layout, the full-precision parameters,
//! the task list with its digest, the environment and the search settings, so
//! a replay needs nothing else. No wall-clock data is stored: two runs with
//! the same inputs write byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::policy::{MlpSpec, ParamVector};
use crate::reward::Score;
use crate::tasks::{GoalTuple, LookupWeights, Task};
use crate::trainer::{BestSolution, Environment, TshcConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub layer_sizes: MlpSpec,
    pub theta: ParamVector,
    pub n_tasks: usize,
    pub n_tasks_star: usize,
    #[serde(rename = "P_star")]
    pub p_star: Option<f64>,
    #[serde(rename = "J_star")]
    pub j_star: Option<Score>,
    pub seed: u64,
    pub config: TshcConfig,
    pub environment: Environment,
    /// Hex sha256 of the task list as written by [`task_digest`].
    pub task_digest: String,
    pub tasks: Vec<Task>,
    pub goal_tuples: Vec<GoalTuple>,
    /// Weights used when a raw setpoint is matched against `goal_tuples`.
    #[serde(default)]
    pub lookup: LookupWeights,
}

/// Digest of a task list, stable across runs and platforms.
pub fn task_digest(tasks: &[Task]) -> Result<String> {
    let body = serde_json::to_vec(tasks)?;
    let hash = Sha256::digest(&body);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

impl Checkpoint {
    /// Builds a checkpoint from a search result. Fails if nothing was recorded.
    pub fn from_best(
        best: &BestSolution,
        spec: &MlpSpec,
        cfg: &TshcConfig,
        env: &Environment,
        tasks: &[Task],
        goal_tuples: Vec<GoalTuple>,
    ) -> Result<Self> {
        let theta = best
            .theta()
            .ok_or_else(|| Error::Checkpoint("no parameters recorded yet".into()))?;
        Ok(Self {
            format_version: FORMAT_VERSION,
            layer_sizes: spec.clone(),
            theta: theta.clone(),
            n_tasks: tasks.len(),
            n_tasks_star: best.n_star(),
            p_star: best.p_star(),
            j_star: best.j_star(),
            seed: cfg.seed,
            config: cfg.clone(),
            environment: env.clone(),
            task_digest: task_digest(tasks)?,
            tasks: tasks.to_vec(),
            goal_tuples,
            lookup: LookupWeights::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        self.theta.check(&self.layer_sizes)?;
        if self.tasks.len() != self.n_tasks {
            return Err(Error::Checkpoint(format!(
                "lists {} tasks but n_tasks is {}",
                self.tasks.len(),
                self.n_tasks
            )));
        }
        let digest = task_digest(&self.tasks)?;
        if digest != self.task_digest {
            return Err(Error::Checkpoint(
                "task digest does not match the task list".into(),
            ));
        }
        Ok(())
    }

    pub fn task(&self, id: &str) -> Result<&Task> {
        self.tasks
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ck: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        ck.validate()?;
        Ok(ck)
    }
}

/// Replaces `path` with `bytes` so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Checkpoint(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
