//! Unicycle kinematics, control saturation and ego-centric transforms.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Simulation step of the high-level controller (5 Hz).
pub const DEFAULT_DT: f64 = 0.2;

/// Wraps an angle into the half-open interval [-π, π).
pub fn wrap_angle(angle: f64) -> f64 {
    let mut wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    // floor() can leave the result one ulp outside the interval
    if wrapped >= PI {
        wrapped -= TAU;
    } else if wrapped < -PI {
        wrapped += TAU;
    }
    wrapped
}

/// Planar pose of one agent in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentState {
    pub px: f64,
    pub py: f64,
    pub theta: f64,
}

impl AgentState {
    pub fn new(px: f64, py: f64, theta: f64) -> Self {
        Self {
            px,
            py,
            theta: wrap_angle(theta),
        }
    }

    pub fn distance_to(&self, other: &AgentState) -> f64 {
        (other.px - self.px).hypot(other.py - self.py)
    }

    pub fn distance_sq_to(&self, other: &AgentState) -> f64 {
        let dx = other.px - self.px;
        let dy = other.py - self.py;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.theta.is_finite()
    }
}

/// Forward speed and yaw rate command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    /// The `[v_x, v_y, v_θ]` vector consumed by the filter's transition
    /// model; the lateral entry is always zero for a unicycle.
    pub fn as_filter_input(&self) -> [f64; 3] {
        [self.v, 0.0, self.omega]
    }
}

/// Box constraints on an agent's controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBounds {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl ControlBounds {
    /// Pursuer: v ∈ [0, 3] m/s, ω ∈ [-2, 2] rad/s.
    pub const PURSUER: ControlBounds = ControlBounds {
        v_min: 0.0,
        v_max: 3.0,
        omega_min: -2.0,
        omega_max: 2.0,
    };

    /// Evader: v ∈ [0, 2.5] m/s, ω ∈ [-2, 2] rad/s.
    pub const EVADER: ControlBounds = ControlBounds {
        v_min: 0.0,
        v_max: 2.5,
        omega_min: -2.0,
        omega_max: 2.0,
    };

    pub fn is_valid(&self) -> bool {
        self.v_min <= self.v_max
            && self.omega_min <= self.omega_max
            && [self.v_min, self.v_max, self.omega_min, self.omega_max]
                .iter()
                .all(|b| b.is_finite())
    }

    pub fn contains(&self, u: &ControlInput) -> bool {
        (self.v_min..=self.v_max).contains(&u.v) && (self.omega_min..=self.omega_max).contains(&u.omega)
    }

    /// Largest speed magnitude either bound allows.
    pub fn speed_extent(&self) -> f64 {
        self.v_min.abs().max(self.v_max.abs())
    }

    pub fn turn_extent(&self) -> f64 {
        self.omega_min.abs().max(self.omega_max.abs())
    }
}

/// Pose of another agent expressed in the ego agent's body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RelativeState {
    pub px_rel: f64,
    pub py_rel: f64,
    pub theta_rel: f64,
}

impl RelativeState {
    pub fn new(px_rel: f64, py_rel: f64, theta_rel: f64) -> Self {
        Self {
            px_rel,
            py_rel,
            theta_rel: wrap_angle(theta_rel),
        }
    }

    pub fn range(&self) -> f64 {
        self.px_rel.hypot(self.py_rel)
    }

    /// Bearing of the other agent from the ego heading, in (-π, π].
    pub fn bearing(&self) -> f64 {
        self.py_rel.atan2(self.px_rel)
    }

    /// The ego agent's pose in the other agent's frame.
    pub fn inverted(&self) -> RelativeState {
        let (s, c) = self.theta_rel.sin_cos();
        RelativeState::new(
            -self.px_rel * c - self.py_rel * s,
            self.px_rel * s - self.py_rel * c,
            -self.theta_rel,
        )
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.px_rel, self.py_rel, self.theta_rel]
    }
}

/// Time derivative of a [`RelativeState`]; heading rate is not wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelativeRate {
    pub dpx: f64,
    pub dpy: f64,
    pub dtheta: f64,
}

pub fn clamp_control(u: ControlInput, bounds: &ControlBounds) -> ControlInput {
    ControlInput {
        v: u.v.clamp(bounds.v_min, bounds.v_max),
        omega: u.omega.clamp(bounds.omega_min, bounds.omega_max),
    }
}

/// One explicit Euler step of the unicycle.
pub fn step_unicycle(state: &AgentState, u: &ControlInput, dt: f64) -> AgentState {
    let (s, c) = state.theta.sin_cos();
    AgentState {
        px: state.px + dt * u.v * c,
        py: state.py + dt * u.v * s,
        theta: wrap_angle(state.theta + dt * u.omega),
    }
}

/// Pose of `exo` in the body frame of `ego`.
pub fn to_relative(ego: &AgentState, exo: &AgentState) -> RelativeState {
    let dx = exo.px - ego.px;
    let dy = exo.py - ego.py;
    let (s, c) = ego.theta.sin_cos();
    RelativeState {
        px_rel: c * dx + s * dy,
        py_rel: -s * dx + c * dy,
        theta_rel: wrap_angle(exo.theta - ego.theta),
    }
}

/// World-frame pose of a point given in `ego`'s body frame.
pub fn from_relative(ego: &AgentState, rel: &RelativeState) -> AgentState {
    let (s, c) = ego.theta.sin_cos();
    AgentState::new(
        ego.px + c * rel.px_rel - s * rel.py_rel,
        ego.py + s * rel.px_rel + c * rel.py_rel,
        ego.theta + rel.theta_rel,
    )
}

/// Continuous-time dynamics of the evader in the pursuer's body frame.
pub fn relative_dynamics(x: &RelativeState, up: &ControlInput, ue: &ControlInput) -> RelativeRate {
    let (s, c) = x.theta_rel.sin_cos();
    RelativeRate {
        dpx: -up.v + ue.v * c + up.omega * x.py_rel,
        dpy: ue.v * s - up.omega * x.px_rel,
        dtheta: ue.omega - up.omega,
    }
}

/// Euler step of the relative dynamics.
pub fn step_relative(x: &RelativeState, up: &ControlInput, ue: &ControlInput, dt: f64) -> RelativeState {
    let rate = relative_dynamics(x, up, ue);
    RelativeState::new(
        x.px_rel + dt * rate.dpx,
        x.py_rel + dt * rate.dpy,
        x.theta_rel + dt * rate.dtheta,
    )
}
