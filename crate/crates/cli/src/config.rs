//! Run configuration files.
//!
//! TOML, unknown keys rejected. Physical quantities may be bare numbers (SI)
//! or strings with a unit suffix such as `"5 km/h"`, `"40 deg"` or
//! `"40 deg/s"`.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use tshc_core::tasks::{
    heading_grid, navigation_task, pendulum_tasks, read_task_list, LookupWeights, PendulumTaskKind,
};
use tshc_core::{
    Environment, MlpSpec, RewardMode, SigmaMode, Task, Tolerances, TshcConfig, VvcConfig, VvcMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Speed,
    Accel,
    Angle,
    AngularRate,
    Time,
    Force,
    Mass,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Length => "length",
            Dim::Speed => "speed",
            Dim::Accel => "acceleration",
            Dim::Angle => "angle",
            Dim::AngularRate => "angular rate",
            Dim::Time => "time",
            Dim::Force => "force",
            Dim::Mass => "mass",
        };
        f.write_str(s)
    }
}

/// A number in SI units, or a number with an explicit unit.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "QtyRepr")]
pub struct Qty {
    si: f64,
    dim: Option<Dim>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QtyRepr {
    Int(i64),
    Num(f64),
    Text(String),
}

const UNITS: &[(&str, Dim, f64)] = &[
    ("m", Dim::Length, 1.0),
    ("km", Dim::Length, 1000.0),
    ("cm", Dim::Length, 0.01),
    ("m/s", Dim::Speed, 1.0),
    ("km/h", Dim::Speed, 1.0 / 3.6),
    ("m/s^2", Dim::Accel, 1.0),
    ("m/s2", Dim::Accel, 1.0),
    ("rad", Dim::Angle, 1.0),
    ("deg", Dim::Angle, std::f64::consts::PI / 180.0),
    ("rad/s", Dim::AngularRate, 1.0),
    ("deg/s", Dim::AngularRate, std::f64::consts::PI / 180.0),
    ("s", Dim::Time, 1.0),
    ("ms", Dim::Time, 0.001),
    ("N", Dim::Force, 1.0),
    ("kg", Dim::Mass, 1.0),
];

impl TryFrom<QtyRepr> for Qty {
    type Error = String;

    fn try_from(r: QtyRepr) -> Result<Self, String> {
        match r {
            QtyRepr::Int(v) => Ok(Qty {
                si: v as f64,
                dim: None,
            }),
            QtyRepr::Num(v) => Ok(Qty { si: v, dim: None }),
            QtyRepr::Text(s) => s.parse(),
        }
    }
}

impl std::str::FromStr for Qty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .or_else(|| {
                // "1e3" style numbers contain 'e'; fall back to the last space
                s.rfind(' ').map(|i| i + 1)
            })
            .unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("cannot read a number from `{s}`"))?;
        let unit = unit.trim();
        if unit.is_empty() {
            return Ok(Qty {
                si: value,
                dim: None,
            });
        }
        let (_, dim, factor) = UNITS
            .iter()
            .find(|(name, _, _)| *name == unit)
            .ok_or_else(|| format!("unknown unit `{unit}` in `{s}`"))?;
        Ok(Qty {
            si: value * factor,
            dim: Some(*dim),
        })
    }
}

impl Qty {
    /// Value in SI units, checking the unit against the expected dimension.
    pub fn get(&self, want: Dim) -> Result<f64, String> {
        match self.dim {
            Some(d) if d != want => Err(format!("expected a {want}, got a {d}")),
            _ => Ok(self.si),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub network: NetworkSection,
    pub search: SearchSection,
    pub tasks: TaskSection,
    #[serde(default)]
    pub vehicle: VehicleSection,
    #[serde(default)]
    pub limits: LimitsSection,
    #[serde(default)]
    pub vvc: VvcSection,
    #[serde(default)]
    pub normalization: NormalizationSection,
    #[serde(default)]
    pub pendulum: PendulumSection,
    #[serde(default)]
    pub lookup: LookupSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub layers: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub n_restarts: usize,
    pub n_iter_max: usize,
    pub n: usize,
    pub t_max: usize,
    #[serde(default = "one")]
    pub t_goal: usize,
    #[serde(default = "two")]
    pub beta: f64,
    pub sigma_min: Option<f64>,
    pub sigma_max: f64,
    #[serde(default = "constant_mode")]
    pub sigma_mode: SigmaMode,
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub reward: RewardSection,
}

fn one() -> usize {
    1
}
fn two() -> f64 {
    2.0
}
fn constant_mode() -> SigmaMode {
    SigmaMode::Constant
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum RewardSection {
    #[default]
    Sparse,
    Rich {
        weights: [f64; 4],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Navigation,
    HeadingGrid,
    Pendulum,
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKind,
    /// Heading grid spacing and upper end.
    pub step: Option<Qty>,
    pub max: Option<Qty>,
    /// Which cart-pole tasks.
    pub pendulum: Option<PendulumTaskKind>,
    /// Task list for `kind = "file"`, relative to the config file.
    pub path: Option<PathBuf>,
    /// Tolerance overrides for generated tasks.
    pub eps_d: Option<Qty>,
    pub eps_psi: Option<Qty>,
    pub eps_v: Option<Qty>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    pub wheelbase: Option<Qty>,
    pub ts: Option<Qty>,
    /// `[x_min, x_max, y_min, y_max]` in metres.
    pub workspace: Option<[f64; 4]>,
    /// Rectangular obstacles, same layout as `workspace`.
    #[serde(default)]
    pub obstacles: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub v_min: Option<Qty>,
    pub v_max: Option<Qty>,
    pub vdot_min: Option<Qty>,
    pub vdot_max: Option<Qty>,
    pub delta_min: Option<Qty>,
    pub delta_max: Option<Qty>,
    pub deltadot_min: Option<Qty>,
    pub deltadot_max: Option<Qty>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VvcSection {
    pub mode: Option<VvcMode>,
    pub r_thresh: Option<Qty>,
    pub margin: Option<Qty>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSection {
    pub dx: Option<Qty>,
    pub dy: Option<Qty>,
    pub dpsi: Option<Qty>,
    pub dv: Option<Qty>,
    pub pendulum: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumSection {
    pub cart_mass: Option<Qty>,
    pub pole_mass: Option<Qty>,
    pub half_length: Option<Qty>,
    pub gravity: Option<f64>,
    pub force_max: Option<Qty>,
    pub ts: Option<Qty>,
    pub track_limit: Option<Qty>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupSection {
    pub w_d: Option<f64>,
    /// Per radian.
    pub w_psi: Option<f64>,
    pub w_v: Option<f64>,
}

/// A loaded, validated configuration ready for training.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub spec: MlpSpec,
    pub cfg: TshcConfig,
    pub env: Environment,
    pub tasks: Vec<Task>,
    pub lookup: LookupWeights,
}

/// 1-based line of the first `key =` assignment, for error messages.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Ctx<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, msg: impl fmt::Display) -> anyhow::Error {
        match line_of(self.text, key) {
            Some(line) => anyhow!("{}:{line}: `{key}`: {msg}", self.path.display()),
            None => anyhow!("{}: `{key}`: {msg}", self.path.display()),
        }
    }

    fn qty(&self, key: &str, q: Option<Qty>, dim: Dim, default: f64) -> Result<f64> {
        match q {
            None => Ok(default),
            Some(q) => q.get(dim).map_err(|e| self.err(key, e)),
        }
    }
}

pub fn load(path: &Path) -> Result<Resolved> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let raw: RunConfig = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        match line {
            Some(l) => anyhow!("{}:{l}: {}", path.display(), e.message()),
            None => anyhow!("{}: {}", path.display(), e.message()),
        }
    })?;
    resolve(raw, &Ctx { path, text: &text })
}

fn resolve(raw: RunConfig, cx: &Ctx<'_>) -> Result<Resolved> {
    let spec = MlpSpec::new(raw.network.layers.clone()).map_err(|e| cx.err("layers", e))?;

    let s = &raw.search;
    let cfg = TshcConfig {
        n_restarts: s.n_restarts,
        n_iter_max: s.n_iter_max,
        n: s.n,
        t_max: s.t_max,
        t_goal: s.t_goal,
        beta: s.beta,
        sigma_min: s.sigma_min.unwrap_or(s.sigma_max.min(0.01)),
        sigma_max: s.sigma_max,
        sigma_mode: s.sigma_mode,
        refine: s.refine,
        seed: raw.seed,
        reward: match s.reward {
            RewardSection::Sparse => RewardMode::Sparse,
            RewardSection::Rich { weights } => RewardMode::Rich { weights },
        },
    };
    if let Err(e) = cfg.validate() {
        let key = [
            "n_restarts",
            "n_iter_max",
            "t_max",
            "t_goal",
            "beta",
            "sigma_min",
            "sigma_max",
            "weights",
        ]
        .into_iter()
        .find(|k| e.to_string().contains(k))
        .or_else(|| (s.n == 0).then_some("n"))
        .unwrap_or("search");
        return Err(cx.err(key, e));
    }

    let env = environment(&raw, cx)?;
    let tasks = tasks(&raw.tasks, cx)?;
    for t in &tasks {
        tshc_core::trainer::check_compatible(&spec, t).map_err(|e| cx.err("layers", e))?;
    }

    let d = LookupWeights::default();
    let lookup = LookupWeights {
        w_d: raw.lookup.w_d.unwrap_or(d.w_d),
        w_psi: raw.lookup.w_psi.unwrap_or(d.w_psi),
        w_v: raw.lookup.w_v.unwrap_or(d.w_v),
    };

    Ok(Resolved {
        seed: raw.seed,
        output_dir: raw.output_dir,
        spec,
        cfg,
        env,
        tasks,
        lookup,
    })
}

fn environment(raw: &RunConfig, cx: &Ctx<'_>) -> Result<Environment> {
    let mut env = Environment::default();
    let v = &raw.vehicle;
    env.vehicle.wheelbase = cx.qty("wheelbase", v.wheelbase, Dim::Length, env.vehicle.wheelbase)?;
    env.vehicle.ts = cx.qty("ts", v.ts, Dim::Time, env.vehicle.ts)?;
    if let Some([x0, x1, y0, y1]) = v.workspace {
        env.vehicle.workspace = tshc_core::Rect::new(x0, x1, y0, y1);
    }
    env.vehicle.obstacles = v
        .obstacles
        .iter()
        .map(|&[x0, x1, y0, y1]| tshc_core::Rect::new(x0, x1, y0, y1))
        .collect();
    env.vehicle.validate().map_err(|e| cx.err("vehicle", e))?;

    let l = &raw.limits;
    let lim = &mut env.limits;
    lim.v_min = cx.qty("v_min", l.v_min, Dim::Speed, lim.v_min)?;
    lim.v_max = cx.qty("v_max", l.v_max, Dim::Speed, lim.v_max)?;
    lim.vdot_min = cx.qty("vdot_min", l.vdot_min, Dim::Accel, lim.vdot_min)?;
    lim.vdot_max = cx.qty("vdot_max", l.vdot_max, Dim::Accel, lim.vdot_max)?;
    lim.delta_min = cx.qty("delta_min", l.delta_min, Dim::Angle, lim.delta_min)?;
    lim.delta_max = cx.qty("delta_max", l.delta_max, Dim::Angle, lim.delta_max)?;
    lim.deltadot_min = cx.qty(
        "deltadot_min",
        l.deltadot_min,
        Dim::AngularRate,
        lim.deltadot_min,
    )?;
    lim.deltadot_max = cx.qty(
        "deltadot_max",
        l.deltadot_max,
        Dim::AngularRate,
        lim.deltadot_max,
    )?;
    lim.validate().map_err(|e| cx.err("limits", e))?;

    let w = &raw.vvc;
    let d = VvcConfig::default();
    env.vvc = VvcConfig {
        mode: w.mode.unwrap_or(d.mode),
        r_thresh: cx.qty("r_thresh", w.r_thresh, Dim::Length, d.r_thresh)?,
        margin: cx.qty("margin", w.margin, Dim::Speed, d.margin)?,
    };
    env.vvc.validate().map_err(|e| cx.err("vvc", e))?;

    let n = &raw.normalization;
    let nm = &mut env.normalization;
    nm.dx = cx.qty("dx", n.dx, Dim::Length, nm.dx)?;
    nm.dy = cx.qty("dy", n.dy, Dim::Length, nm.dy)?;
    nm.dpsi = cx.qty("dpsi", n.dpsi, Dim::Angle, nm.dpsi)?;
    nm.dv = cx.qty("dv", n.dv, Dim::Speed, nm.dv)?;
    if let Some(p) = n.pendulum {
        nm.pendulum = p;
    }
    nm.validate().map_err(|e| cx.err("normalization", e))?;

    let p = &raw.pendulum;
    let pp = &mut env.pendulum;
    pp.cart_mass = cx.qty("cart_mass", p.cart_mass, Dim::Mass, pp.cart_mass)?;
    pp.pole_mass = cx.qty("pole_mass", p.pole_mass, Dim::Mass, pp.pole_mass)?;
    pp.half_length = cx.qty("half_length", p.half_length, Dim::Length, pp.half_length)?;
    pp.gravity = p.gravity.unwrap_or(pp.gravity);
    pp.force_max = cx.qty("force_max", p.force_max, Dim::Force, pp.force_max)?;
    pp.ts = cx.qty("ts", p.ts, Dim::Time, pp.ts)?;
    if let Some(q) = p.track_limit {
        pp.track_limit = Some(q.get(Dim::Length).map_err(|e| cx.err("track_limit", e))?);
    }
    pp.validate().map_err(|e| cx.err("pendulum", e))?;
    Ok(env)
}

fn tasks(t: &TaskSection, cx: &Ctx<'_>) -> Result<Vec<Task>> {
    let mut tasks = match t.kind {
        TaskKind::Navigation => vec![navigation_task()],
        TaskKind::HeadingGrid => {
            let step = cx
                .qty("step", t.step, Dim::Angle, 10f64.to_radians())?
                .to_degrees();
            let max = cx
                .qty("max", t.max, Dim::Angle, 90f64.to_radians())?
                .to_degrees();
            // round away float noise from the degree conversion
            let (step, max) = ((step * 1e9).round() / 1e9, (max * 1e9).round() / 1e9);
            heading_grid(step, max).map_err(|e| cx.err("step", e))?
        }
        TaskKind::Pendulum => pendulum_tasks(t.pendulum.unwrap_or(PendulumTaskKind::Both)),
        TaskKind::File => {
            let rel = t
                .path
                .as_ref()
                .ok_or_else(|| cx.err("kind", "`path` is required for kind = \"file\""))?;
            let path = cx.path.parent().unwrap_or(Path::new(".")).join(rel);
            read_task_list(&path).map_err(|e| cx.err("path", format!("{}: {e}", path.display())))?
        }
    };
    if tasks.is_empty() {
        bail!("{}: task list is empty", cx.path.display());
    }
    for task in &mut tasks {
        let tol: &mut Tolerances = &mut task.tolerances;
        tol.eps_d = cx.qty("eps_d", t.eps_d, Dim::Length, tol.eps_d)?;
        tol.eps_psi = cx.qty("eps_psi", t.eps_psi, Dim::Angle, tol.eps_psi)?;
        tol.eps_v = cx.qty("eps_v", t.eps_v, Dim::Speed, tol.eps_v)?;
        task.validate().map_err(|e| cx.err("tasks", e))?;
    }
    Ok(tasks)
}
