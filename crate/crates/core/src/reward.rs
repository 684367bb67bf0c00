//! Sparse reward machinery: goal flags, per-step rewards, the success window,
//! pathlength, virtual velocity constraints, and the optional shaped reward.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::wrap_angle;
use crate::error::{Error, Result};

/// Goal tolerances. For cart-pole tasks only `eps_psi` (the pole angle) is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Position, m.
    pub eps_d: f64,
    /// Heading (or pole angle), rad.
    pub eps_psi: f64,
    /// Velocity, m/s.
    pub eps_v: f64,
}

impl Tolerances {
    /// 0.25 m, 1°, 5 km/h.
    pub fn vehicle_default() -> Self {
        Self {
            eps_d: 0.25,
            eps_psi: 1f64.to_radians(),
            eps_v: 5.0 / 3.6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.eps_d, self.eps_psi, self.eps_v]
            .iter()
            .all(|e| *e > 0.0 && e.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "tolerances must be strictly positive, got {self:?}"
            )))
        }
    }
}

/// Accumulated (or per-step) reward with a crash sentinel.
///
/// A crashed score orders below every finite one. Crashes absorb: adding
/// anything to a crashed score leaves it crashed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    value: f64,
    crashed: bool,
}

impl Score {
    pub const ZERO: Score = Score {
        value: 0.0,
        crashed: false,
    };
    pub const CRASH: Score = Score {
        value: 0.0,
        crashed: true,
    };

    pub fn finite(value: f64) -> Self {
        Self {
            value,
            crashed: false,
        }
    }

    pub fn is_crash(&self) -> bool {
        self.crashed
    }

    /// Finite value, `None` for the sentinel.
    pub fn value(&self) -> Option<f64> {
        (!self.crashed).then_some(self.value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Score) -> Score {
        if self.crashed || other.crashed {
            Score::CRASH
        } else {
            Score::finite(self.value + other.value)
        }
    }

    /// Total order: sentinel < any finite value, finite values by `total_cmp`.
    /// Two sentinels compare equal; callers break that tie themselves.
    pub fn total_cmp(&self, other: &Score) -> Ordering {
        match (self.crashed, other.crashed) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.value.total_cmp(&other.value),
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("crash"),
        }
    }
}

// Finite scores serialize as plain numbers, the sentinel as the string "crash".
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScoreRepr {
    Finite(f64),
    Sentinel(String),
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.value() {
            Some(v) => ScoreRepr::Finite(v),
            None => ScoreRepr::Sentinel("crash".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ScoreRepr::deserialize(d)? {
            ScoreRepr::Finite(v) => Ok(Score::finite(v)),
            ScoreRepr::Sentinel(s) if s == "crash" => Ok(Score::CRASH),
            ScoreRepr::Sentinel(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"crash\", got {s:?}"
            ))),
        }
    }
}

/// Position, wrapped heading and speed errors between two `[x, y, psi, v]` poses.
pub fn pose_errors(state: &[f64; 4], goal: &[f64; 4]) -> (f64, f64, f64) {
    let dx = state[0] - goal[0];
    let dy = state[1] - goal[1];
    (
        (dx * dx + dy * dy).sqrt(),
        wrap_angle(state[2] - goal[2]).abs(),
        (state[3] - goal[3]).abs(),
    )
}

/// True iff position, heading and velocity errors are all strictly inside tolerance.
pub fn goal_flag(state: &[f64; 4], goal: &[f64; 4], tol: &Tolerances) -> bool {
    let (e_d, e_psi, e_v) = pose_errors(state, goal);
    e_d < tol.eps_d && e_psi < tol.eps_psi && e_v < tol.eps_v
}

/// Cart-pole goal: pole angle within `eps_psi` of the target, nothing else.
pub fn pendulum_goal_flag(theta: f64, theta_goal: f64, tol: &Tolerances) -> bool {
    wrap_angle(theta - theta_goal).abs() < tol.eps_psi
}

/// `-1` per step, the sentinel on crash.
pub fn sparse_reward(crash: bool) -> Score {
    if crash {
        Score::CRASH
    } else {
        Score::finite(-1.0)
    }
}

/// 1 iff the last `t_goal` flags are all set.
pub fn success_integral(history: &[bool], t_goal: usize) -> bool {
    t_goal >= 1 && history.len() >= t_goal && history[history.len() - t_goal..].iter().all(|&f| f)
}

/// Negated Euclidean length of one step.
pub fn pathlength_delta(from: (f64, f64), to: (f64, f64)) -> f64 {
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    -(dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VvcMode {
    Off,
    Spatial,
    ConstantMargin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VvcConfig {
    pub mode: VvcMode,
    /// Radius around the goal inside which the constraint is active, m.
    pub r_thresh: f64,
    /// Half-width of the constant-margin box, m/s.
    pub margin: f64,
}

impl Default for VvcConfig {
    fn default() -> Self {
        Self {
            mode: VvcMode::Spatial,
            r_thresh: 5.0,
            margin: 5.0 / 3.6,
        }
    }
}

impl VvcConfig {
    pub fn off() -> Self {
        Self {
            mode: VvcMode::Off,
            ..Self::default()
        }
    }

    pub fn spatial(r_thresh: f64) -> Self {
        Self {
            mode: VvcMode::Spatial,
            r_thresh,
            ..Self::default()
        }
    }

    pub fn constant_margin(r_thresh: f64, margin: f64) -> Self {
        Self {
            mode: VvcMode::ConstantMargin,
            r_thresh,
            margin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_thresh > 0.0 && self.r_thresh.is_finite()) {
            return Err(Error::Config(format!(
                "vvc: r_thresh must be positive, got {}",
                self.r_thresh
            )));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::Config(format!(
                "vvc: margin must be non-negative, got {}",
                self.margin
            )));
        }
        Ok(())
    }
}

/// Velocity bounds in force at distance `e_d` from the goal.
pub fn vvc_bounds(e_d: f64, v_goal: f64, v_min: f64, v_max: f64, cfg: &VvcConfig) -> (f64, f64) {
    match cfg.mode {
        VvcMode::Off => (v_min, v_max),
        _ if e_d >= cfg.r_thresh => (v_min, v_max),
        VvcMode::Spatial => {
            let shrink = |m: f64| v_goal + (m - v_goal) / cfg.r_thresh * e_d;
            (shrink(v_min), shrink(v_max))
        }
        VvcMode::ConstantMargin => (
            (v_goal - cfg.margin).max(v_min),
            (v_goal + cfg.margin).min(v_max),
        ),
    }
}

/// `-sum(alpha_l * (z_l - ref_l)^2)`, or the sentinel on crash. Index 2 is an
/// angle (heading or pole angle) and its residual is wrapped.
pub fn rich_reward(state: &[f64], reference: &[f64], weights: &[f64], crash: bool) -> Score {
    if crash {
        return Score::CRASH;
    }
    let cost: f64 = state
        .iter()
        .zip(reference)
        .zip(weights)
        .enumerate()
        .map(|(l, ((z, r), a))| {
            let e = if l == 2 { wrap_angle(z - r) } else { z - r };
            a * e * e
        })
        .sum();
    Score::finite(-cost)
}

/// What the reward function reports for one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: Score,
    /// Always `<= 0`.
    pub delta_p: f64,
    pub goal_flag: bool,
    pub crash_flag: bool,
}
