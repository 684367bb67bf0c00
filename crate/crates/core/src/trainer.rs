//! Task separation with hill climbing.
//!
//! Each iteration fans out `n` Gaussian perturbations of the current
//! parameter vector, rolls every candidate out on every task, and moves to
//! the best candidate. Candidates solving all tasks are ranked by total
//! pathlength; otherwise by accumulated reward. The perturbation scale can be
//! constant, redrawn uniformly per restart or per iteration, or adapted to
//! progress in the number of solved tasks.
//!
//! Randomness is counter-based: candidate `i` of iteration `(restart, iter)`
//! draws its noise from a stream keyed on `(seed, restart, iter, i)`, so the
//! outcome does not depend on how many worker threads evaluate candidates.

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    crash_check, pendulum_crash, step_bicycle, step_pendulum, ActuatorLimits, PendulumParams,
    PendulumState, VehicleParams, VehicleState,
};
use crate::error::{Error, Result};
use crate::policy::{
    init_params, perturb, scale_force, scale_outputs, Mlp, MlpSpec, ParamVector, Policy,
};
use crate::reward::{
    goal_flag, pathlength_delta, pendulum_goal_flag, pose_errors, rich_reward, sparse_reward,
    vvc_bounds, Score, VvcConfig, VvcMode,
};
use crate::tasks::{mirror_features, write_features, EnvKind, GoalTuple, Normalization, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// `sigma_max` throughout.
    Constant,
    /// `U[sigma_min, sigma_max]`, drawn once per restart.
    RandomPerRestart,
    /// `U[sigma_min, sigma_max]`, drawn every iteration.
    RandomPerIter,
    /// Starts at `sigma_max`; shrinks by `beta` when more tasks get solved,
    /// grows by `beta` when fewer do.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RewardMode {
    Sparse,
    /// Weighted squared error to the goal state, one weight per state entry.
    Rich {
        weights: [f64; 4],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TshcConfig {
    pub n_restarts: usize,
    pub n_iter_max: usize,
    /// Candidates per iteration.
    pub n: usize,
    pub t_max: usize,
    /// Consecutive goal flags required for success.
    pub t_goal: usize,
    pub beta: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_mode: SigmaMode,
    /// Keep iterating after every task is solved.
    pub refine: bool,
    pub seed: u64,
    pub reward: RewardMode,
}

impl Default for TshcConfig {
    fn default() -> Self {
        Self {
            n_restarts: 1,
            n_iter_max: 1,
            n: 1000,
            t_max: 100,
            t_goal: 1,
            beta: 2.0,
            sigma_min: 0.01,
            sigma_max: 10.0,
            sigma_mode: SigmaMode::Constant,
            refine: false,
            seed: 0,
            reward: RewardMode::Sparse,
        }
    }
}

impl TshcConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_restarts", self.n_restarts),
            ("n_iter_max", self.n_iter_max),
            ("n", self.n),
            ("t_max", self.t_max),
            ("t_goal", self.t_goal),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        // sigma = 0 is allowed: it degenerates to re-evaluating the current point
        if !(self.sigma_min >= 0.0
            && self.sigma_min <= self.sigma_max
            && self.sigma_max.is_finite())
        {
            return Err(Error::Config(format!(
                "need 0 <= sigma_min <= sigma_max, got {} and {}",
                self.sigma_min, self.sigma_max
            )));
        }
        if let RewardMode::Rich { weights } = self.reward {
            if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return Err(Error::Config(
                    "rich reward weights must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Everything about the simulated world that is not the task itself.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub vehicle: VehicleParams,
    pub limits: ActuatorLimits,
    pub vvc: VvcConfig,
    pub pendulum: PendulumParams,
    pub normalization: Normalization,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.limits.validate()?;
        self.vvc.validate()?;
        self.pendulum.validate()?;
        self.normalization.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RolloutOptions {
    /// Keep every visited state.
    pub record: bool,
    /// Run the policy through the x-axis reflection (vehicle tasks only).
    pub mirror: bool,
}

/// Cart-pole state together with the force that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumSample {
    pub state: PendulumState,
    pub force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// Includes the initial state; each later state carries the control that led to it.
    Vehicle(Vec<VehicleState>),
    Pendulum(Vec<PendulumSample>),
}

impl Trajectory {
    pub fn len(&self) -> usize {
        match self {
            Trajectory::Vehicle(v) => v.len(),
            Trajectory::Pendulum(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub solved: bool,
    /// Accumulated negative pathlength.
    pub pathlength: f64,
    pub ret: Score,
    pub steps: usize,
    pub final_state: [f64; 4],
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub n_solved: usize,
    pub pathlength: f64,
    pub ret: Score,
}

/// Best parameters seen so far together with the score that put them there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    n_tasks: usize,
    theta: Option<ParamVector>,
    score: Option<CandidateScore>,
}

impl BestSolution {
    pub fn new(n_tasks: usize) -> Self {
        Self {
            n_tasks,
            theta: None,
            score: None,
        }
    }

    pub fn theta(&self) -> Option<&ParamVector> {
        self.theta.as_ref()
    }

    pub fn score(&self) -> Option<&CandidateScore> {
        self.score.as_ref()
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn n_star(&self) -> usize {
        self.score.map_or(0, |s| s.n_solved)
    }

    /// Pathlength of the recorded solution, set only once it solves every task.
    pub fn p_star(&self) -> Option<f64> {
        self.score
            .filter(|s| s.n_solved == self.n_tasks)
            .map(|s| s.pathlength)
    }

    pub fn j_star(&self) -> Option<Score> {
        self.score.map(|s| s.ret)
    }

    pub fn is_complete(&self) -> bool {
        self.p_star().is_some()
    }

    /// Stores `theta` and its score as the new best.
    pub fn record(&mut self, theta: ParamVector, score: CandidateScore) {
        self.theta = Some(theta);
        self.score = Some(score);
    }
}

fn initial_pendulum(z0: &[f64; 4]) -> PendulumState {
    PendulumState {
        p: z0[0],
        p_dot: z0[1],
        theta: crate::dynamics::wrap_angle(z0[2]),
        theta_dot: z0[3],
        t: 0,
    }
}

fn initial_vehicle(z0: &[f64; 4]) -> VehicleState {
    VehicleState {
        v_prev: z0[3],
        ..VehicleState::at_rest(z0[0], z0[1], z0[2])
    }
}

/// Checks that a network fits a task's features and controls.
pub fn check_compatible(spec: &MlpSpec, task: &Task) -> Result<()> {
    let want_in = task.recipe.dim();
    let want_out = task.env.control_dim();
    if spec.input_dim() != want_in || spec.output_dim() != want_out {
        return Err(Error::Dimension {
            expected: format!(
                "network [{want_in}, .., {want_out}] for {:?} task `{}`",
                task.env, task.id
            ),
            actual: format!("network {:?}", spec.layer_sizes()),
        });
    }
    Ok(())
}

/// Simulates one task from its initial state under `theta`.
pub fn rollout(
    theta: &ParamVector,
    spec: &MlpSpec,
    task: &Task,
    env: &Environment,
    cfg: &TshcConfig,
    opts: RolloutOptions,
) -> Result<RolloutResult> {
    check_compatible(spec, task)?;
    let mut mlp = Mlp::new(spec, theta)?;
    Ok(rollout_with(&mut mlp, task, env, cfg, opts))
}

/// [`rollout`] for an arbitrary policy whose dimensions were already checked.
pub fn rollout_with<P: Policy>(
    policy: &mut P,
    task: &Task,
    env: &Environment,
    cfg: &TshcConfig,
    opts: RolloutOptions,
) -> RolloutResult {
    policy.reset_state();
    let t_max = task.t_max.unwrap_or(cfg.t_max);
    match task.env {
        EnvKind::Vehicle => vehicle_rollout(policy, task, env, cfg, t_max, opts),
        EnvKind::Pendulum => pendulum_rollout(policy, task, env, cfg, t_max, opts),
    }
}

fn step_reward(cfg: &TshcConfig, state: &[f64; 4], goal: &[f64; 4], crash: bool) -> Score {
    match cfg.reward {
        RewardMode::Sparse => sparse_reward(crash),
        RewardMode::Rich { weights } => rich_reward(state, goal, &weights, crash),
    }
}

fn vehicle_rollout<P: Policy>(
    policy: &mut P,
    task: &Task,
    env: &Environment,
    cfg: &TshcConfig,
    t_max: usize,
    opts: RolloutOptions,
) -> RolloutResult {
    let params = &env.vehicle;
    let lim = &env.limits;
    let goal = &task.z_goal;
    let mut features = [0.0; 5];
    let features = &mut features[..task.recipe.dim()];
    let mut raw = [0.0; 2];

    let mut s = initial_vehicle(&task.z0);
    let mut trajectory = opts.record.then(|| vec![s]);
    let mut last_raw_steer = 0.0;
    let mut streak = 0;
    let mut pathlength = 0.0;
    let mut ret = Score::ZERO;
    let mut solved = false;
    let mut steps = 0;

    for _ in 0..t_max {
        let pose = s.pose();
        write_features(&pose, task, last_raw_steer, &env.normalization, features);
        if opts.mirror {
            mirror_features(features, task.recipe);
        }
        policy.act(features, &mut raw);
        if opts.mirror {
            raw[1] = -raw[1];
        }
        last_raw_steer = raw[1];

        let vvc_box = (env.vvc.mode != VvcMode::Off).then(|| {
            let (e_d, _, _) = pose_errors(&pose, goal);
            vvc_bounds(e_d, goal[3], lim.v_min, lim.v_max, &env.vvc)
        });
        let a = scale_outputs(raw, s.previous_control(), lim, vvc_box, params.ts);
        let next = step_bicycle(&s, a, params);

        let finite = next.is_finite();
        let crash = !finite || crash_check(&next, params);
        let next_pose = next.pose();
        if finite {
            pathlength += pathlength_delta((s.x, s.y), (next.x, next.y));
        }
        ret = ret.add(step_reward(cfg, &next_pose, goal, crash));
        let flag = !crash && goal_flag(&next_pose, goal, &task.tolerances);
        streak = if flag { streak + 1 } else { 0 };
        solved = streak >= cfg.t_goal;

        s = next;
        steps += 1;
        if let Some(tr) = trajectory.as_mut() {
            tr.push(s);
        }
        if solved || crash {
            break;
        }
    }

    RolloutResult {
        solved,
        pathlength,
        ret,
        steps,
        final_state: s.pose(),
        trajectory: trajectory.map(Trajectory::Vehicle),
    }
}

fn pendulum_rollout<P: Policy>(
    policy: &mut P,
    task: &Task,
    env: &Environment,
    cfg: &TshcConfig,
    t_max: usize,
    opts: RolloutOptions,
) -> RolloutResult {
    let params: &PendulumParams = &env.pendulum;
    let goal = &task.z_goal;
    let mut features = [0.0; 4];
    let mut raw = [0.0; 1];

    let mut s = initial_pendulum(&task.z0);
    let mut trajectory = opts.record.then(|| {
        vec![PendulumSample {
            state: s,
            force: 0.0,
        }]
    });
    let mut streak = 0;
    let mut pathlength = 0.0;
    let mut ret = Score::ZERO;
    let mut solved = false;
    let mut steps = 0;

    for _ in 0..t_max {
        write_features(&s.vector(), task, 0.0, &env.normalization, &mut features);
        policy.act(&features, &mut raw);
        let force = scale_force(raw[0], params.force_max);
        let next = step_pendulum(&s, force, params);

        let finite = next.is_finite();
        let crash = !finite || pendulum_crash(&next, params);
        if finite {
            // cart travel stands in for pathlength
            pathlength += pathlength_delta((s.p, 0.0), (next.p, 0.0));
        }
        ret = ret.add(step_reward(cfg, &next.vector(), goal, crash));
        let flag = !crash && pendulum_goal_flag(next.theta, goal[2], &task.tolerances);
        streak = if flag { streak + 1 } else { 0 };
        solved = streak >= cfg.t_goal;

        s = next;
        steps += 1;
        if let Some(tr) = trajectory.as_mut() {
            tr.push(PendulumSample { state: s, force });
        }
        if solved || crash {
            break;
        }
    }

    RolloutResult {
        solved,
        pathlength,
        ret,
        steps,
        final_state: s.vector(),
        trajectory: trajectory.map(Trajectory::Pendulum),
    }
}

/// Rolls one candidate out on every task and aggregates the results.
pub fn evaluate_candidate(
    theta: &ParamVector,
    spec: &MlpSpec,
    tasks: &[Task],
    env: &Environment,
    cfg: &TshcConfig,
) -> Result<CandidateScore> {
    let mut mlp = Mlp::new(spec, theta)?;
    let mut score = CandidateScore {
        n_solved: 0,
        pathlength: 0.0,
        ret: Score::ZERO,
    };
    for task in tasks {
        check_compatible(spec, task)?;
        let r = rollout_with(&mut mlp, task, env, cfg, RolloutOptions::default());
        score.n_solved += usize::from(r.solved);
        score.pathlength += r.pathlength;
        score.ret = score.ret.add(r.ret);
    }
    Ok(score)
}

/// Order used when no candidate solves every task: by accumulated reward,
/// with two crashed candidates compared by solved count, then pathlength.
pub fn reward_order(a: &CandidateScore, b: &CandidateScore) -> Ordering {
    match a.ret.total_cmp(&b.ret) {
        Ordering::Equal if a.ret.is_crash() => a
            .n_solved
            .cmp(&b.n_solved)
            .then(a.pathlength.total_cmp(&b.pathlength)),
        o => o,
    }
}

/// Outcome of one selection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    /// Candidate the search moves to.
    pub index: usize,
    /// Tasks solved by that candidate.
    pub n_solved: usize,
    /// Whether the candidate replaces the global best.
    pub improves_best: bool,
}

fn argmax_by<T>(
    items: impl Iterator<Item = (usize, T)>,
    cmp: impl Fn(&T, &T) -> Ordering,
) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, item) in items {
        match &best {
            Some((_, b)) if cmp(&item, b) != Ordering::Greater => {}
            _ => best = Some((i, item)),
        }
    }
    best
}

/// Picks the next hill-climbing point and decides whether it becomes the
/// global best. Ties go to the lowest index.
///
/// # Panics
/// If `scores` is empty.
pub fn select_best(scores: &[CandidateScore], best: &BestSolution, n_tasks: usize) -> Selection {
    assert!(
        !scores.is_empty(),
        "select_best needs at least one candidate"
    );
    let full = argmax_by(
        scores
            .iter()
            .enumerate()
            .filter(|(_, s)| s.n_solved == n_tasks),
        |a, b| a.pathlength.total_cmp(&b.pathlength),
    );
    if let Some((index, s)) = full {
        let improves_best = best.p_star().is_none_or(|p| s.pathlength > p);
        return Selection {
            index,
            n_solved: s.n_solved,
            improves_best,
        };
    }
    let (index, s) = argmax_by(scores.iter().enumerate(), |a, b| reward_order(a, b)).unwrap();
    let improves_best = best.p_star().is_none()
        && best
            .score()
            .is_none_or(|b| reward_order(s, b) == Ordering::Greater);
    Selection {
        index,
        n_solved: s.n_solved,
        improves_best,
    }
}

/// Adaptive perturbation scale: shrink on progress, grow on regression.
pub fn adapt_sigma(
    sigma: f64,
    n_new: usize,
    n_old: usize,
    beta: f64,
    sigma_min: f64,
    sigma_max: f64,
) -> f64 {
    let next = match n_new.cmp(&n_old) {
        Ordering::Greater => (sigma / beta).max(sigma_min),
        Ordering::Less => (sigma * beta).min(sigma_max),
        Ordering::Equal => sigma,
    };
    next.clamp(sigma_min, sigma_max)
}

/// Perturbation scale at a restart or iteration boundary.
pub fn draw_sigma<R: Rng + ?Sized>(mode: SigmaMode, rng: &mut R, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = bounds;
    match mode {
        SigmaMode::Constant | SigmaMode::Adaptive => hi,
        SigmaMode::RandomPerRestart | SigmaMode::RandomPerIter => {
            if lo < hi {
                rng.random_range(lo..=hi)
            } else {
                hi
            }
        }
    }
}

const STREAM_INIT: u64 = 1;
const STREAM_SIGMA_RESTART: u64 = 2;
const STREAM_SIGMA_ITER: u64 = 3;
const STREAM_CANDIDATE: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one `(seed, tag, indices...)` coordinate.
pub fn stream_rng(seed: u64, tag: u64, indices: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed ^ splitmix64(tag));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub restart: usize,
    pub iter: usize,
    pub sigma: f64,
    pub n_tasks_star: usize,
    #[serde(rename = "P")]
    pub pathlength: f64,
    #[serde(rename = "J")]
    pub ret: Score,
    pub improved_best: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub iterations: usize,
    /// Tasks solved by the final hill-climbing point.
    pub n_solved: usize,
    pub solved_all: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: BestSolution,
    pub restarts: Vec<RestartSummary>,
    pub wall_time_s: f64,
}

impl TrainOutcome {
    pub fn restarts_with_solution(&self) -> usize {
        self.restarts.iter().filter(|r| r.solved_all).count()
    }
}

/// Hooks called at each synchronization point.
pub trait TrainObserver {
    fn on_iteration(&mut self, _record: &IterationRecord) -> Result<()> {
        Ok(())
    }
    fn on_improvement(&mut self, _best: &BestSolution) -> Result<()> {
        Ok(())
    }
}

impl TrainObserver for () {}

pub struct Trainer<'a> {
    pub cfg: &'a TshcConfig,
    pub spec: &'a MlpSpec,
    pub tasks: &'a [Task],
    pub env: &'a Environment,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        cfg: &'a TshcConfig,
        spec: &'a MlpSpec,
        tasks: &'a [Task],
        env: &'a Environment,
    ) -> Self {
        Self {
            cfg,
            spec,
            tasks,
            env,
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::Config("at least one task is required".into()));
        }
        self.cfg.validate()?;
        self.env.validate()?;
        for t in self.tasks {
            t.validate()?;
            check_compatible(self.spec, t)?;
        }
        Ok(())
    }

    pub fn run(&self, observer: &mut dyn TrainObserver) -> Result<TrainOutcome> {
        self.validate()?;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        self.run_inner(&pool, observer)
    }

    fn candidate(
        &self,
        theta: &ParamVector,
        sigma: f64,
        restart: usize,
        iter: usize,
        i: usize,
    ) -> ParamVector {
        let mut rng = stream_rng(
            self.cfg.seed,
            STREAM_CANDIDATE,
            &[restart as u64, iter as u64, i as u64],
        );
        perturb(theta, sigma, &mut rng)
    }

    fn run_inner(
        &self,
        pool: &rayon::ThreadPool,
        observer: &mut dyn TrainObserver,
    ) -> Result<TrainOutcome> {
        let cfg = self.cfg;
        let n_tasks = self.tasks.len();
        let bounds = (cfg.sigma_min, cfg.sigma_max);
        let start = Instant::now();
        let mut best = BestSolution::new(n_tasks);
        let mut restarts = Vec::with_capacity(cfg.n_restarts);

        for restart in 0..cfg.n_restarts {
            let mut theta = init_params(
                self.spec,
                &mut stream_rng(cfg.seed, STREAM_INIT, &[restart as u64]),
            );
            let mut sigma = draw_sigma(
                cfg.sigma_mode,
                &mut stream_rng(cfg.seed, STREAM_SIGMA_RESTART, &[restart as u64]),
                bounds,
            );
            let mut n_old = 0;
            let mut iterations = 0;

            for iter in 0..cfg.n_iter_max {
                if cfg.sigma_mode == SigmaMode::RandomPerIter {
                    sigma = draw_sigma(
                        cfg.sigma_mode,
                        &mut stream_rng(
                            cfg.seed,
                            STREAM_SIGMA_ITER,
                            &[restart as u64, iter as u64],
                        ),
                        bounds,
                    );
                }
                let used_sigma = sigma;

                let scores = pool.install(|| {
                    (0..cfg.n)
                        .into_par_iter()
                        .map(|i| {
                            let cand = self.candidate(&theta, sigma, restart, iter, i);
                            evaluate_candidate(&cand, self.spec, self.tasks, self.env, cfg)
                        })
                        .collect::<Result<Vec<_>>>()
                })?;

                let sel = select_best(&scores, &best, n_tasks);
                // regenerate the winner from its stream instead of keeping all n vectors
                let winner = self.candidate(&theta, sigma, restart, iter, sel.index);
                if sel.improves_best {
                    best.record(winner.clone(), scores[sel.index]);
                }
                if cfg.sigma_mode == SigmaMode::Adaptive {
                    sigma = adapt_sigma(
                        sigma,
                        sel.n_solved,
                        n_old,
                        cfg.beta,
                        cfg.sigma_min,
                        cfg.sigma_max,
                    );
                }
                theta = winner;
                n_old = sel.n_solved;
                iterations += 1;

                let s = scores[sel.index];
                observer.on_iteration(&IterationRecord {
                    restart,
                    iter,
                    sigma: used_sigma,
                    n_tasks_star: s.n_solved,
                    pathlength: s.pathlength,
                    ret: s.ret,
                    improved_best: sel.improves_best,
                    wall_time_s: start.elapsed().as_secs_f64(),
                })?;
                if sel.improves_best {
                    observer.on_improvement(&best)?;
                }
                if !cfg.refine && sel.n_solved == n_tasks {
                    break;
                }
            }

            restarts.push(RestartSummary {
                restart,
                iterations,
                n_solved: n_old,
                solved_all: n_old == n_tasks,
            });
        }

        Ok(TrainOutcome {
            best,
            restarts,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// Runs the full search with default threading and no observer.
pub fn tshc_run(
    cfg: &TshcConfig,
    tasks: &[Task],
    env: &Environment,
    spec: &MlpSpec,
) -> Result<BestSolution> {
    Ok(Trainer::new(cfg, spec, tasks, env).run(&mut ())?.best)
}

/// Replays `theta` on every task and keeps `(achieved, commanded)` pairs for
/// the ones it solves.
pub fn goal_tuples(
    theta: &ParamVector,
    spec: &MlpSpec,
    tasks: &[Task],
    env: &Environment,
    cfg: &TshcConfig,
) -> Result<Vec<GoalTuple>> {
    let mut out = Vec::new();
    for task in tasks {
        let r = rollout(theta, spec, task, env, cfg, RolloutOptions::default())?;
        if r.solved {
            out.push(GoalTuple {
                task_id: task.id.clone(),
                achieved: r.final_state,
                goal: task.z_goal,
            });
        }
    }
    Ok(out)
}
