//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tshc_core::dynamics::{clamp_controls, step_bicycle, step_pendulum, wrap_angle};
use tshc_core::policy::param_count;
use tshc_core::reward::vvc_bounds;
use tshc_core::tasks::{
    heading_grid, mirror_pose, mirror_task, navigation_task, nearest_goal_lookup, pendulum_tasks,
    PendulumTaskKind,
};
use tshc_core::trainer::{
    adapt_sigma, goal_tuples, rollout, select_best, stream_rng, RestartSummary,
};
use tshc_core::{
    ActuatorLimits, BestSolution, CandidateScore, Checkpoint, Control, Environment,
    IterationRecord, LookupWeights, MlpSpec, Normalization, ParamVector, PendulumParams,
    PendulumState, RolloutOptions, Score, SigmaMode, Task, TrainObserver, TrainOutcome, Trainer,
    Trajectory, TshcConfig, VehicleParams, VehicleState, VvcConfig,
};

struct Report {
    failed: usize,
    lines: Vec<(u32, String)>,
}

impl Report {
    fn line(&mut self, n: u32, ok: bool, detail: impl AsRef<str>) {
        if !ok {
            self.failed += 1;
        }
        let line = format!(
            "{} criterion {n}: {}",
            if ok { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
        eprintln!("{line}");
        self.lines.push((n, line));
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

// ---------------------------------------------------------------- 1

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let small = param_count(&MlpSpec::new([5, 8, 2]).unwrap());
    let large = param_count(&MlpSpec::new([4, 64, 64, 2]).unwrap());
    let elapsed = t.elapsed();
    r.line(
        1,
        small == 66 && large == 4610 && elapsed < Duration::from_secs(1),
        format!("param_count [5,8,2] = {small} (want 66), [4,64,64,2] = {large} (want 4610)"),
    );
}

// ---------------------------------------------------------------- 2 and 7

/// Iteration budget for the navigation experiment; it stops early once solved.
const EXP1_ITERS: usize = 400;
const EXP1_LIMIT: Duration = Duration::from_secs(300);

fn exp1(seed: u64) -> (TshcConfig, MlpSpec, Vec<Task>, Environment) {
    let mut env = Environment::default();
    env.vehicle.ts = 0.1;
    env.vvc = VvcConfig::spatial(5.0);
    let cfg = TshcConfig {
        n_restarts: 1,
        n_iter_max: EXP1_ITERS,
        n: 1000,
        t_max: 100,
        sigma_max: 10.0,
        sigma_mode: SigmaMode::Constant,
        seed,
        ..TshcConfig::default()
    };
    (
        cfg,
        MlpSpec::new([4, 64, 64, 2]).unwrap(),
        vec![navigation_task()],
        env,
    )
}

fn checkpoint_json(
    out: &TrainOutcome,
    cfg: &TshcConfig,
    spec: &MlpSpec,
    tasks: &[Task],
    env: &Environment,
) -> String {
    let theta = out.best.theta().unwrap();
    let tuples = goal_tuples(theta, spec, tasks, env, cfg).unwrap();
    Checkpoint::from_best(&out.best, spec, cfg, env, tasks, tuples)
        .unwrap()
        .to_json()
        .unwrap()
}

fn criteria_2_and_7(r: &mut Report) {
    let mut solved = 0;
    let mut details = Vec::new();
    let mut seed0 = None;
    for seed in 0..3u64 {
        let (cfg, spec, tasks, env) = exp1(seed);
        let t = Instant::now();
        let out = Trainer::new(&cfg, &spec, &tasks, &env)
            .with_threads(1)
            .run(&mut ())
            .unwrap();
        let elapsed = t.elapsed();
        let iters = out
            .restarts
            .iter()
            .map(|s: &RestartSummary| s.iterations)
            .sum::<usize>();
        let ok = out.best.is_complete() && elapsed <= EXP1_LIMIT;
        solved += usize::from(ok);
        details.push(format!(
            "seed {seed}: F={} after {iters} iterations in {}",
            u8::from(out.best.is_complete()),
            secs(elapsed)
        ));
        if seed == 0 {
            seed0 = Some(checkpoint_json(&out, &cfg, &spec, &tasks, &env));
        }
    }
    r.line(
        2,
        solved >= 2,
        format!(
            "navigation to [20, 0, pi/4, 0] solved in {solved}/3 seeds within 5 min ({})",
            details.join("; ")
        ),
    );

    let (cfg, spec, tasks, env) = exp1(0);
    let t = Instant::now();
    let out = Trainer::new(&cfg, &spec, &tasks, &env)
        .with_threads(8)
        .run(&mut ())
        .unwrap();
    let eight = checkpoint_json(&out, &cfg, &spec, &tasks, &env);
    let one = seed0.unwrap();
    r.line(
        7,
        one == eight,
        format!(
            "seed-0 navigation checkpoint with 1 and 8 workers: {} ({} bytes, rerun {})",
            if one == eight {
                "bit-identical"
            } else {
                "DIFFERENT"
            },
            one.len(),
            secs(t.elapsed())
        ),
    );
}

// ---------------------------------------------------------------- 3 and 4

fn grid_setup(seed: u64, restarts: usize) -> (TshcConfig, MlpSpec, Vec<Task>, Environment) {
    let env = Environment {
        vvc: VvcConfig::constant_margin(5.0, 4.5 / 3.6),
        normalization: Normalization {
            dx: 0.25,
            dy: 0.25,
            ..Normalization::default()
        },
        ..Environment::default()
    };
    let cfg = TshcConfig {
        n_restarts: restarts,
        n_iter_max: 20,
        n: 1000,
        t_max: 2000,
        sigma_min: 10.0,
        sigma_max: 1000.0,
        sigma_mode: SigmaMode::RandomPerIter,
        seed,
        ..TshcConfig::default()
    };
    (
        cfg,
        MlpSpec::new([5, 8, 2]).unwrap(),
        heading_grid(10.0, 90.0).unwrap(),
        env,
    )
}

/// Heading dominates the lookup: the grid goals differ only in heading.
fn grid_lookup() -> LookupWeights {
    LookupWeights {
        w_psi: 180.0 / PI,
        ..LookupWeights::default()
    }
}

fn criteria_3_and_4(r: &mut Report) {
    // One restart of seed 0 is within the allowed ten.
    let (cfg, spec, tasks, env) = grid_setup(0, 1);
    let t = Instant::now();
    let out = Trainer::new(&cfg, &spec, &tasks, &env)
        .run(&mut ())
        .unwrap();
    let elapsed = t.elapsed();
    let ok3 = out.restarts_with_solution() >= 1 && elapsed <= Duration::from_secs(30 * 60);
    r.line(
        3,
        ok3,
        format!(
            "heading grid 0..90 deg: {}/{} tasks, {} of {} restarts solved all, {}",
            out.best.n_star(),
            tasks.len(),
            out.restarts_with_solution(),
            cfg.n_restarts,
            secs(elapsed)
        ),
    );

    let Some(theta) = out.best.theta() else {
        r.line(4, false, "no checkpoint from the heading grid");
        return;
    };
    let store = goal_tuples(theta, &spec, &tasks, &env, &cfg).unwrap();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for task in &tasks {
        let plain = rollout(
            theta,
            &spec,
            task,
            &env,
            &cfg,
            RolloutOptions {
                record: true,
                mirror: false,
            },
        )
        .unwrap();
        if !plain.solved {
            continue;
        }
        checked += 1;
        // The reflected setpoint is mapped back to a trained goal.
        let setpoint = mirror_pose(&task.z_goal);
        let query = if setpoint[2] < 0.0 {
            mirror_pose(&setpoint)
        } else {
            setpoint
        };
        let tuple = nearest_goal_lookup(&query, &store, &grid_lookup()).unwrap();
        if tuple.task_id != task.id {
            failures.push(format!("{} looked up {}", task.id, tuple.task_id));
            continue;
        }
        let mirrored = mirror_task(task);
        let refl = rollout(
            theta,
            &spec,
            &mirrored,
            &env,
            &cfg,
            RolloutOptions {
                record: true,
                mirror: true,
            },
        )
        .unwrap();
        if !refl.solved {
            failures.push(format!("{} mirrored not solved", task.id));
            continue;
        }
        let (Some(Trajectory::Vehicle(a)), Some(Trajectory::Vehicle(b))) =
            (&plain.trajectory, &refl.trajectory)
        else {
            unreachable!()
        };
        if a.len() != b.len() {
            failures.push(format!("{} lengths {} vs {}", task.id, a.len(), b.len()));
            continue;
        }
        for (p, q) in a.iter().zip(b) {
            let dpsi = wrap_angle(p.psi + q.psi).abs();
            for d in [
                (p.x - q.x).abs(),
                (p.y + q.y).abs(),
                dpsi,
                (p.v_prev - q.v_prev).abs(),
                (p.delta_prev + q.delta_prev).abs(),
            ] {
                worst = worst.max(d);
            }
        }
    }
    let ok4 = checked == tasks.len() && failures.is_empty() && worst <= 1e-9;
    r.line(
        4,
        ok4,
        format!(
            "mirrored setpoints: {checked} solved tasks checked, {} failures, max reflection error {worst:e}{}",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(" ({})", failures.join(", ")) }
        ),
    );
}

// ---------------------------------------------------------------- 5

fn criterion_5(r: &mut Report) {
    let spec = MlpSpec::new([4, 64, 64, 1]).unwrap();
    let tasks = pendulum_tasks(PendulumTaskKind::Swingup);
    let env = Environment::default();
    let mut tried = Vec::new();
    for seed in 0..5u64 {
        let cfg = TshcConfig {
            n_restarts: 3,
            n_iter_max: 100,
            n: 100,
            t_max: 500,
            beta: 2.0,
            sigma_min: 0.01,
            sigma_max: 10.0,
            sigma_mode: SigmaMode::Adaptive,
            seed,
            ..TshcConfig::default()
        };
        let t = Instant::now();
        let out = Trainer::new(&cfg, &spec, &tasks, &env)
            .run(&mut ())
            .unwrap();
        let elapsed = t.elapsed();
        let theta = out.best.theta().unwrap();
        let res = rollout(
            theta,
            &spec,
            &tasks[0],
            &env,
            &cfg,
            RolloutOptions::default(),
        )
        .unwrap();
        let ok = out.restarts_with_solution() >= 1
            && res.solved
            && res.steps <= 500
            && elapsed <= Duration::from_secs(45 * 60);
        tried.push(format!(
            "seed {seed}: {} of 3 restarts, upright within 12 deg at step {}, {}",
            out.restarts_with_solution(),
            res.steps,
            secs(elapsed)
        ));
        if ok {
            r.line(
                5,
                true,
                format!("cart-pole swing-up ({})", tried.join("; ")),
            );
            return;
        }
    }
    r.line(
        5,
        false,
        format!(
            "cart-pole swing-up failed for 5 seeds ({})",
            tried.join("; ")
        ),
    );
}

// ---------------------------------------------------------------- 6

/// Selection state of the brute-force oracle: P* and the J* key.
#[derive(Clone, Copy, Default)]
struct Oracle {
    p_star: Option<f64>,
    j_star: Option<(f64, usize, f64)>,
}

/// Reward key: crashes rank below every finite reward, two crashes compare by
/// solved count, then pathlength.
fn j_key(s: &CandidateScore) -> (f64, usize, f64) {
    match s.ret.value() {
        Some(j) => (j, 0, 0.0),
        None => (f64::NEG_INFINITY, s.n_solved, s.pathlength),
    }
}

fn key_gt(a: (f64, usize, f64), b: (f64, usize, f64)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.0 == f64::NEG_INFINITY {
        return (a.1, a.2) > (b.1, b.2);
    }
    false
}

/// Literal enumeration of the selection steps: `(i*, N_i*, replaces best)`.
fn oracle_select(
    scores: &[CandidateScore],
    st: &mut Oracle,
    n_tasks: usize,
) -> (usize, usize, bool) {
    let mut i_star = None;
    for (i, s) in scores.iter().enumerate() {
        if s.n_solved == n_tasks
            && i_star.is_none_or(|k: usize| s.pathlength > scores[k].pathlength)
        {
            i_star = Some(i);
        }
    }
    if let Some(i) = i_star {
        let p = scores[i].pathlength;
        let better = p > st.p_star.unwrap_or(f64::NEG_INFINITY);
        if better {
            st.p_star = Some(p);
            st.j_star = Some(j_key(&scores[i]));
        }
        return (i, n_tasks, better);
    }
    let mut i = 0;
    for k in 1..scores.len() {
        if key_gt(j_key(&scores[k]), j_key(&scores[i])) {
            i = k;
        }
    }
    let key = j_key(&scores[i]);
    let better = st.p_star.is_none() && st.j_star.is_none_or(|j| key_gt(key, j));
    if better {
        st.j_star = Some(key);
    }
    (i, scores[i].n_solved, better)
}

fn random_score(rng: &mut ChaCha8Rng, n_tasks: usize) -> CandidateScore {
    // Small value sets make ties common.
    let n_solved = rng.random_range(0..=n_tasks);
    let pathlength = -f64::from(rng.random_range(0..6u8));
    let ret = if rng.random_bool(0.15) {
        Score::CRASH
    } else {
        Score::finite(-f64::from(rng.random_range(0..8u8)))
    };
    CandidateScore {
        n_solved,
        pathlength,
        ret,
    }
}

fn select_best_matches_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_tasks = 3;
    let spec = MlpSpec::new([1, 1]).unwrap();
    let mut best = BestSolution::new(n_tasks);
    let mut oracle = Oracle::default();
    for case in 0..1000 {
        if case % 50 == 0 {
            best = BestSolution::new(n_tasks);
            oracle = Oracle::default();
        }
        let len = rng.random_range(1..8);
        let scores: Vec<CandidateScore> =
            (0..len).map(|_| random_score(&mut rng, n_tasks)).collect();
        let sel = select_best(&scores, &best, n_tasks);
        let want = oracle_select(&scores, &mut oracle, n_tasks);
        if (sel.index, sel.n_solved, sel.improves_best) != want {
            return Err(format!(
                "case {case}: got {sel:?}, oracle {want:?} for {scores:?}"
            ));
        }
        if sel.improves_best {
            best.record(ParamVector::zeros(&spec), scores[sel.index]);
        }
        if best.p_star() != oracle.p_star {
            return Err(format!(
                "case {case}: P* {:?} vs oracle {:?}",
                best.p_star(),
                oracle.p_star
            ));
        }
    }
    Ok(())
}

fn clamp_idempotent() -> Result<(), String> {
    let lim = ActuatorLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let raw = Control {
            v: rng.random_range(-60.0..60.0),
            delta: rng.random_range(-3.0..3.0),
        };
        let prev = Control {
            v: rng.random_range(-10.0..10.0),
            delta: rng.random_range(-0.7..0.7),
        };
        let ts = rng.random_range(0.001..0.2);
        let once = clamp_controls(raw, prev, &lim, ts);
        let twice = clamp_controls(once, prev, &lim, ts);
        if once != twice {
            return Err(format!("clamp not idempotent for {raw:?} {prev:?} ts={ts}"));
        }
    }
    Ok(())
}

fn vvc_continuity() -> Result<(), String> {
    let cfg = VvcConfig::spatial(5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let v_goal = rng.random_range(-10.0..10.0);
        let below = vvc_bounds(5.0 - 1e-12, v_goal, -10.0, 10.0, &cfg);
        let at = vvc_bounds(5.0, v_goal, -10.0, 10.0, &cfg);
        if at != (-10.0, 10.0) || (below.0 - at.0).abs() > 1e-9 || (below.1 - at.1).abs() > 1e-9 {
            return Err(format!(
                "discontinuous at R for v_goal={v_goal}: {below:?} vs {at:?}"
            ));
        }
        if vvc_bounds(0.0, v_goal, -10.0, 10.0, &cfg) != (v_goal, v_goal) {
            return Err(format!("e_d = 0 does not pin v_goal={v_goal}"));
        }
    }
    let half = vvc_bounds(2.5, 0.0, -10.0, 10.0, &cfg);
    if half != (-5.0, 5.0) {
        return Err(format!("e_d = R/2 gives {half:?}, want (-5, 5)"));
    }
    Ok(())
}

fn sparse_return_is_minus_t() -> Result<(), String> {
    let spec = MlpSpec::new([4, 8, 2]).unwrap();
    let task = navigation_task();
    let env = Environment::default();
    for (k, t_max) in [1usize, 7, 50, 100].into_iter().enumerate() {
        let theta = tshc_core::policy::init_params(&spec, &mut stream_rng(5, 9, &[k as u64]));
        let cfg = TshcConfig {
            t_max,
            ..TshcConfig::default()
        };
        let res = rollout(&theta, &spec, &task, &env, &cfg, RolloutOptions::default())
            .map_err(|e| e.to_string())?;
        if res.solved || res.ret != Score::finite(-(t_max as f64)) || res.steps != t_max {
            return Err(format!("T={t_max}: J={} steps={}", res.ret, res.steps));
        }
    }
    Ok(())
}

fn adapt_sigma_rules() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let lo = rng.random_range(0.001..1.0);
        let hi = lo + rng.random_range(0.0..100.0);
        let sigma = rng.random_range(lo..=hi);
        let beta = rng.random_range(1.01..5.0);
        let (a, b) = (rng.random_range(0..5usize), rng.random_range(0..5usize));
        let s = adapt_sigma(sigma, a, b, beta, lo, hi);
        let direction_ok = match a.cmp(&b) {
            std::cmp::Ordering::Greater => s <= sigma,
            std::cmp::Ordering::Less => s >= sigma,
            std::cmp::Ordering::Equal => s == sigma,
        };
        if !(lo..=hi).contains(&s) || !direction_ok {
            return Err(format!(
                "adapt_sigma({sigma}, {a}, {b}, {beta}, {lo}, {hi}) = {s}"
            ));
        }
    }
    if adapt_sigma(10.0, 5, 3, 2.0, 0.01, 16.0) != 5.0
        || adapt_sigma(10.0, 3, 5, 2.0, 0.01, 16.0) != 16.0
    {
        return Err("worked examples differ".into());
    }
    Ok(())
}

struct SigmaWatch {
    lo: f64,
    hi: f64,
    seen: usize,
    bad: Vec<f64>,
}

impl TrainObserver for SigmaWatch {
    fn on_iteration(&mut self, r: &IterationRecord) -> tshc_core::Result<()> {
        self.seen += 1;
        if !(self.lo..=self.hi).contains(&r.sigma) {
            self.bad.push(r.sigma);
        }
        Ok(())
    }
}

fn sigma_stays_in_bounds() -> Result<(), String> {
    let spec = MlpSpec::new([4, 8, 1]).unwrap();
    let tasks = pendulum_tasks(PendulumTaskKind::Both);
    let env = Environment::default();
    for (mode, lo, hi) in [
        (SigmaMode::Adaptive, 0.05, 3.0),
        (SigmaMode::RandomPerIter, 10.0, 1000.0),
        (SigmaMode::RandomPerRestart, 0.5, 2.0),
        (SigmaMode::Constant, 0.01, 10.0),
    ] {
        let cfg = TshcConfig {
            n_restarts: 2,
            n_iter_max: 25,
            n: 8,
            t_max: 60,
            t_goal: 30,
            beta: 1.7,
            sigma_min: lo,
            sigma_max: hi,
            sigma_mode: mode,
            refine: true,
            seed: 11,
            ..TshcConfig::default()
        };
        let mut watch = SigmaWatch {
            lo,
            hi,
            seen: 0,
            bad: Vec::new(),
        };
        Trainer::new(&cfg, &spec, &tasks, &env)
            .run(&mut watch)
            .map_err(|e| e.to_string())?;
        if watch.seen != 50 || !watch.bad.is_empty() {
            return Err(format!(
                "{mode:?}: {} iterations, out of bounds {:?}",
                watch.seen, watch.bad
            ));
        }
    }
    Ok(())
}

type Suite = fn() -> Result<(), String>;

fn criterion_6(r: &mut Report) {
    let t = Instant::now();
    let suites: [(&str, Suite); 6] = [
        ("clamp idempotence", clamp_idempotent),
        ("VVC continuity and endpoints", vvc_continuity),
        ("sparse J = -T", sparse_return_is_minus_t),
        (
            "select_best vs brute force (1000 lists)",
            select_best_matches_oracle,
        ),
        ("adapt_sigma clamping and direction", adapt_sigma_rules),
        ("sigma within bounds during training", sigma_stays_in_bounds),
    ];
    let mut failures = Vec::new();
    for (name, f) in suites {
        if let Err(e) = f() {
            failures.push(format!("{name}: {e}"));
        }
    }
    let elapsed = t.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    r.line(
        6,
        ok,
        if failures.is_empty() {
            format!("{} property suites in {}", suites.len(), secs(elapsed))
        } else {
            failures.join("; ")
        },
    );
}

// ---------------------------------------------------------------- 8

fn criterion_8(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());

    let mut p = VehicleParams {
        ts: 0.01,
        ..VehicleParams::default()
    };
    let s = step_bicycle(
        &VehicleState::at_rest(0.0, 0.0, 0.0),
        Control { v: 1.0, delta: 0.0 },
        &p,
    );
    check(s.x, 0.01);
    check(s.y, 0.0);
    check(s.psi, 0.0);

    let s = step_bicycle(
        &VehicleState::at_rest(0.0, 0.0, 0.0),
        Control {
            v: 3.5,
            delta: PI / 4.0,
        },
        &p,
    );
    check(s.psi, 0.01);

    let s = step_bicycle(
        &VehicleState::at_rest(2.0, -1.0, 0.7),
        Control { v: 0.0, delta: 0.3 },
        &p,
    );
    check(s.x, 2.0);
    check(s.y, -1.0);
    check(s.psi, 0.7);

    // psi = pi/6, v = 2, Ts = 0.1: x' = 0.1*2*cos(pi/6) = sqrt(3)/10, y' = 0.1.
    p.ts = 0.1;
    let s = step_bicycle(
        &VehicleState::at_rest(0.0, 0.0, PI / 6.0),
        Control { v: 2.0, delta: 0.0 },
        &p,
    );
    check(s.x, 3f64.sqrt() / 10.0);
    check(s.y, 0.1);
    check(s.psi, PI / 6.0);

    // Cart-pole from upright rest with F = 10 N (m_c = 1, m_p = 0.1, l = 0.5, g = 9.8, Ts = 0.02):
    // theta_ddot = -(100/11) / (0.5 (4/3 - 1/11)) = -600/41, p_ddot = 4400/451.
    let pp = PendulumParams::default();
    let s = step_pendulum(&PendulumState::at_rest(0.0), 10.0, &pp);
    check(s.p, 0.0);
    check(s.theta, 0.0);
    check(s.p_dot, 0.02 * 4400.0 / 451.0);
    check(s.theta_dot, -0.02 * 600.0 / 41.0);

    // Hanging rest is a fixed point; so is upright rest without force.
    for theta0 in [0.0, PI] {
        let s = step_pendulum(&PendulumState::at_rest(theta0), 0.0, &pp);
        check(s.p, 0.0);
        check(s.p_dot, 0.0);
        check(wrap_angle(s.theta - theta0), 0.0);
        check(s.theta_dot, 0.0);
    }

    let lim = ActuatorLimits::default();
    let c = clamp_controls(
        Control {
            v: 50.0,
            delta: 0.0,
        },
        Control { v: 0.0, delta: 0.0 },
        &lim,
        0.01,
    );
    check(c.v, 0.05);
    let lim = ActuatorLimits {
        vdot_min: -5.0,
        ..lim
    };
    let c = clamp_controls(
        Control {
            v: -50.0,
            delta: 0.0,
        },
        Control { v: 0.0, delta: 0.0 },
        &lim,
        0.01,
    );
    check(c.v, -0.05);

    r.line(
        8,
        worst <= 1e-12,
        format!("bicycle, cart-pole and clamp single steps, max error {worst:e}"),
    );
}

fn main() {
    let mut r = Report {
        failed: 0,
        lines: Vec::new(),
    };
    let t = Instant::now();
    criterion_1(&mut r);
    criterion_8(&mut r);
    criterion_6(&mut r);
    criterion_5(&mut r);
    criteria_3_and_4(&mut r);
    criteria_2_and_7(&mut r);
    r.lines.sort_by_key(|(n, _)| *n);
    for (_, line) in &r.lines {
        println!("{line}");
    }
    println!(
        "acceptance: {} failed, total {}",
        r.failed,
        secs(t.elapsed())
    );
    if r.failed > 0 {
        std::process::exit(1);
    }
}
