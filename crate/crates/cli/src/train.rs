use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use tshc_core::checkpoint::write_atomic;
use tshc_core::tasks::write_task_list;
use tshc_core::trainer::{goal_tuples, RestartSummary};
use tshc_core::{
    BestSolution, Checkpoint, Environment, IterationRecord, LookupWeights, MlpSpec, Score, Task,
    TrainObserver, Trainer, TshcConfig,
};

use crate::config;

pub fn artifact(dir: &Path, stem: &str, seed: u64, ext: &str) -> PathBuf {
    dir.join(format!("{stem}-seed{seed}.{ext}"))
}

struct Sink<'a> {
    log: BufWriter<File>,
    checkpoint: PathBuf,
    spec: &'a MlpSpec,
    cfg: &'a TshcConfig,
    env: &'a Environment,
    tasks: &'a [Task],
    lookup: LookupWeights,
    n_tasks: usize,
    quiet: bool,
}

impl TrainObserver for Sink<'_> {
    fn on_iteration(&mut self, r: &IterationRecord) -> tshc_core::Result<()> {
        serde_json::to_writer(&mut self.log, r)?;
        self.log.write_all(b"\n")?;
        self.log.flush()?;
        if !self.quiet {
            eprintln!(
                "restart {} iter {:>3}  sigma {:<10.4}  solved {}/{}  P {:<12.4}  J {:<10}  {}{:.1} s",
                r.restart,
                r.iter,
                r.sigma,
                r.n_tasks_star,
                self.n_tasks,
                r.pathlength,
                r.ret.to_string(),
                if r.improved_best { "* " } else { "  " },
                r.wall_time_s,
            );
        }
        Ok(())
    }

    fn on_improvement(&mut self, best: &BestSolution) -> tshc_core::Result<()> {
        let theta = best.theta().expect("improvement records parameters");
        let tuples = goal_tuples(theta, self.spec, self.tasks, self.env, self.cfg)?;
        let mut ck =
            Checkpoint::from_best(best, self.spec, self.cfg, self.env, self.tasks, tuples)?;
        ck.lookup = self.lookup;
        ck.save(&self.checkpoint)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    n_tasks: usize,
    #[serde(rename = "N_star")]
    n_star: usize,
    #[serde(rename = "P_star")]
    p_star: Option<f64>,
    #[serde(rename = "J_star")]
    j_star: Option<Score>,
    solved_all: bool,
    restarts_with_solution: usize,
    wall_time_s: f64,
    checkpoint: String,
    restarts: &'a [RestartSummary],
}

/// Returns whether every task was solved.
pub fn run(
    config_path: &Path,
    out_dir: Option<&Path>,
    threads: Option<usize>,
    quiet: bool,
) -> Result<bool> {
    let rc = config::load(config_path)?;
    let dir = crate::output_dir(out_dir, rc.output_dir.as_deref());
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let seed = rc.seed;
    let ck_path = artifact(&dir, "checkpoint", seed, "json");
    let log_path = artifact(&dir, "log", seed, "jsonl");
    write_task_list(&artifact(&dir, "tasks", seed, "json"), &rc.tasks)?;

    let log =
        File::create(&log_path).with_context(|| format!("cannot create {}", log_path.display()))?;
    let mut sink = Sink {
        log: BufWriter::new(log),
        checkpoint: ck_path.clone(),
        spec: &rc.spec,
        cfg: &rc.cfg,
        env: &rc.env,
        tasks: &rc.tasks,
        lookup: rc.lookup,
        n_tasks: rc.tasks.len(),
        quiet,
    };
    let mut trainer = Trainer::new(&rc.cfg, &rc.spec, &rc.tasks, &rc.env);
    trainer.threads = threads;
    let outcome = trainer.run(&mut sink)?;

    let best = &outcome.best;
    let summary = Summary {
        seed,
        n_tasks: rc.tasks.len(),
        n_star: best.n_star(),
        p_star: best.p_star(),
        j_star: best.j_star(),
        solved_all: best.is_complete(),
        restarts_with_solution: outcome.restarts_with_solution(),
        wall_time_s: outcome.wall_time_s,
        checkpoint: ck_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        restarts: &outcome.restarts,
    };
    let body = serde_json::to_string_pretty(&summary)? + "\n";
    write_atomic(&artifact(&dir, "summary", seed, "json"), body.as_bytes())?;

    eprintln!(
        "solved {}/{} tasks, P* {}, {} of {} restarts solved everything, {:.1} s; checkpoint {}",
        best.n_star(),
        rc.tasks.len(),
        best.p_star().map_or("unset".to_string(), |p| p.to_string()),
        outcome.restarts_with_solution(),
        outcome.restarts.len(),
        outcome.wall_time_s,
        ck_path.display()
    );
    Ok(best.is_complete())
}
