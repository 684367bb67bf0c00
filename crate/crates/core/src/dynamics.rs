//! Deterministic discrete-time plant models.
//!
//! Two simulators live here: an Euler-discretized kinematic bicycle with
//! absolute and rate actuator limits, and the classic cart-pole. Every
//! function is pure, so workers can call them concurrently without sharing
//! anything.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
///
/// Angles already inside the interval are returned untouched, and the
/// mapping is odd (`wrap(-a) == -wrap(a)`) everywhere except at the `±pi`
/// seam. Mirrored rollouts rely on that.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a % TAU;
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

/// Vehicle pose plus the last applied control, which the rate limits need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v_prev: f64,
    pub delta_prev: f64,
    pub t: usize,
}

impl VehicleState {
    /// State at rest with the steering centred.
    pub fn at_rest(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
            v_prev: 0.0,
            delta_prev: 0.0,
            t: 0,
        }
    }

    /// The `[x, y, psi, v]` vector used by tasks and reward terms.
    pub fn pose(&self) -> [f64; 4] {
        [self.x, self.y, self.psi, self.v_prev]
    }

    pub fn previous_control(&self) -> Control {
        Control {
            v: self.v_prev,
            delta: self.delta_prev,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.psi.is_finite()
            && self.v_prev.is_finite()
            && self.delta_prev.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    /// Velocity command, m/s.
    pub v: f64,
    /// Steering angle, rad.
    pub delta: f64,
}

/// Absolute and rate bounds on both actuators (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub vdot_min: f64,
    pub vdot_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub deltadot_min: f64,
    pub deltadot_max: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        let forty = 40f64.to_radians();
        Self {
            v_min: -10.0,
            v_max: 10.0,
            vdot_min: -8.0,
            vdot_max: 5.0,
            delta_min: -forty,
            delta_max: forty,
            deltadot_min: -forty,
            deltadot_max: forty,
        }
    }
}

impl ActuatorLimits {
    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("v", self.v_min, self.v_max),
            ("vdot", self.vdot_min, self.vdot_max),
            ("delta", self.delta_min, self.delta_max),
            ("deltadot", self.deltadot_min, self.deltadot_max),
        ];
        for (name, lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "actuator limits: {name}_min ({lo}) must be below {name}_max ({hi})"
                )));
            }
        }
        if self.delta_min <= -PI / 2.0 || self.delta_max >= PI / 2.0 {
            return Err(Error::Config(
                "actuator limits: steering bounds must stay inside (-90°, 90°)".into(),
            ));
        }
        Ok(())
    }

    /// Admissible velocity interval given the previously applied velocity.
    pub fn velocity_box(&self, v_prev: f64, ts: f64) -> (f64, f64) {
        channel_box(
            v_prev,
            self.v_min,
            self.v_max,
            self.vdot_min,
            self.vdot_max,
            ts,
        )
    }

    /// Admissible steering interval given the previously applied angle.
    pub fn steering_box(&self, delta_prev: f64, ts: f64) -> (f64, f64) {
        channel_box(
            delta_prev,
            self.delta_min,
            self.delta_max,
            self.deltadot_min,
            self.deltadot_max,
            ts,
        )
    }
}

/// Intersection of the absolute box with the one-step rate box around `prev`.
///
/// When the two do not overlap the interval collapses onto the rate-feasible
/// endpoint closest to the absolute box.
fn channel_box(prev: f64, lo: f64, hi: f64, rate_lo: f64, rate_hi: f64, ts: f64) -> (f64, f64) {
    let reach_lo = prev + rate_lo * ts;
    let reach_hi = prev + rate_hi * ts;
    let lower = reach_lo.max(lo);
    let upper = reach_hi.min(hi);
    if lower <= upper {
        (lower, upper)
    } else if reach_lo > hi {
        (reach_lo, reach_lo)
    } else {
        (reach_hi, reach_hi)
    }
}

/// Projects a raw control onto the admissible box for this step.
pub fn clamp_controls(raw: Control, prev: Control, lim: &ActuatorLimits, ts: f64) -> Control {
    let (vl, vu) = lim.velocity_box(prev.v, ts);
    let (dl, du) = lim.steering_box(prev.delta, ts);
    Control {
        v: raw.v.clamp(vl, vu),
        delta: raw.delta.clamp(dl, du),
    }
}

/// Axis-aligned rectangle, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// Closed containment test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn is_degenerate(&self) -> bool {
        !(self.x_min < self.x_max && self.y_min < self.y_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Wheelbase `l_f`, m.
    pub wheelbase: f64,
    /// Sampling time, s.
    pub ts: f64,
    pub workspace: Rect,
    #[serde(default)]
    pub obstacles: Vec<Rect>,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 3.5,
            ts: 0.01,
            workspace: Rect::new(-100.0, 100.0, -100.0, 100.0),
            obstacles: Vec::new(),
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return Err(Error::Config(format!(
                "vehicle: wheelbase must be positive, got {}",
                self.wheelbase
            )));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::Config(format!(
                "vehicle: sampling time must be positive, got {}",
                self.ts
            )));
        }
        if self.workspace.is_degenerate() {
            return Err(Error::Config("vehicle: workspace box is degenerate".into()));
        }
        if self.obstacles.iter().any(Rect::is_degenerate) {
            return Err(Error::Config(
                "vehicle: obstacle rectangle is degenerate".into(),
            ));
        }
        Ok(())
    }
}

/// One explicit Euler step of the kinematic bicycle.
///
/// `a` must already be admissible; see [`clamp_controls`].
pub fn step_bicycle(s: &VehicleState, a: Control, p: &VehicleParams) -> VehicleState {
    let (sin_psi, cos_psi) = (s.psi.sin(), s.psi.cos());
    VehicleState {
        x: s.x + p.ts * a.v * cos_psi,
        y: s.y + p.ts * a.v * sin_psi,
        psi: wrap_angle(s.psi + p.ts * (a.v / p.wheelbase) * a.delta.tan()),
        v_prev: a.v,
        delta_prev: a.delta,
        t: s.t + 1,
    }
}

/// True when the reference point has left the workspace or entered an obstacle.
pub fn crash_check(s: &VehicleState, p: &VehicleParams) -> bool {
    !p.workspace.contains(s.x, s.y) || p.obstacles.iter().any(|o| o.contains(s.x, s.y))
}

/// Cart-pole state. `theta = 0` is upright; positive `theta` leans the pole
/// towards `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    pub p: f64,
    pub p_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub t: usize,
}

impl PendulumState {
    pub fn at_rest(theta: f64) -> Self {
        Self {
            p: 0.0,
            p_dot: 0.0,
            theta: wrap_angle(theta),
            theta_dot: 0.0,
            t: 0,
        }
    }

    pub fn vector(&self) -> [f64; 4] {
        [self.p, self.p_dot, self.theta, self.theta_dot]
    }

    pub fn is_finite(&self) -> bool {
        self.vector().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Distance from pivot to the pole's centre of mass, m.
    pub half_length: f64,
    pub gravity: f64,
    /// Symmetric force bound, N.
    pub force_max: f64,
    pub ts: f64,
    /// Cart leaving `|p| > track_limit` counts as a crash. `None` disables it.
    #[serde(default)]
    pub track_limit: Option<f64>,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            gravity: 9.8,
            force_max: 10.0,
            ts: 0.02,
            track_limit: None,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("half_length", self.half_length),
            ("gravity", self.gravity),
            ("force_max", self.force_max),
            ("ts", self.ts),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "pendulum: {name} must be positive, got {v}"
                )));
            }
        }
        if let Some(l) = self.track_limit {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::Config(format!(
                    "pendulum: track_limit must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    fn total_mass(&self) -> f64 {
        self.cart_mass + self.pole_mass
    }
}

/// Cart and pole accelerations `(p_ddot, theta_ddot)`.
fn pendulum_accel(s: &PendulumState, force: f64, p: &PendulumParams) -> (f64, f64) {
    let (sin_t, cos_t) = (s.theta.sin(), s.theta.cos());
    let m = p.total_mass();
    let pole_ml = p.pole_mass * p.half_length;
    let temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin_t) / m;
    let theta_acc = (p.gravity * sin_t - cos_t * temp)
        / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / m));
    let p_acc = temp - pole_ml * theta_acc * cos_t / m;
    (p_acc, theta_acc)
}

/// One explicit Euler step of the cart-pole.
pub fn step_pendulum(s: &PendulumState, force: f64, p: &PendulumParams) -> PendulumState {
    let (p_acc, theta_acc) = pendulum_accel(s, force, p);
    PendulumState {
        p: s.p + p.ts * s.p_dot,
        p_dot: s.p_dot + p.ts * p_acc,
        theta: wrap_angle(s.theta + p.ts * s.theta_dot),
        theta_dot: s.theta_dot + p.ts * theta_acc,
        t: s.t + 1,
    }
}

pub fn pendulum_crash(s: &PendulumState, p: &PendulumParams) -> bool {
    p.track_limit.is_some_and(|l| s.p.abs() > l)
}

/// Total mechanical energy, with the pole modelled as a uniform rod pivoting
/// at the cart. Potential energy is zero at pivot height.
pub fn pendulum_energy(s: &PendulumState, p: &PendulumParams) -> f64 {
    let (m_c, m_p, l) = (p.cart_mass, p.pole_mass, p.half_length);
    let kinetic = 0.5 * (m_c + m_p) * s.p_dot * s.p_dot
        + m_p * l * s.theta.cos() * s.p_dot * s.theta_dot
        + (2.0 / 3.0) * m_p * l * l * s.theta_dot * s.theta_dot;
    kinetic + m_p * p.gravity * l * s.theta.cos()
}
