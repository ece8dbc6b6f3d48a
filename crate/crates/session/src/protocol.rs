//! Wire protocol: one JSON object per WebSocket text message, discriminated
//! by its `type` field.
//!
//! Client → server:
//!
//! | `type`    | fields                                                                 |
//! |-----------|------------------------------------------------------------------------|
//! | `create`  | `pursuer` (policy name or tagged spec), `seed`?, `tick_ms`?, `clock`? (`"realtime"` \| `"manual"`), `config`? (episode config overrides) |
//! | `control` | `session`, `v` (m/s), `omega` (rad/s)                                  |
//! | `step`    | `session` — advances a `manual`-clock session by one tick              |
//!
//! Server → client:
//!
//! | `type`    | fields                                                                 |
//! |-----------|------------------------------------------------------------------------|
//! | `created` | `session`, `tick_ms`, `clock`, `horizon`, `dt`, `capture_radius`, `evader_bounds` |
//! | `ack`     | `session`, `v`, `omega` — the control as clamped and held              |
//! | `frame`   | see [`Frame`]                                                          |
//! | `end`     | `session`, `status`, `time_to_capture`, `discounted_return`, `ticks`   |
//! | `error`   | `code`, `message`, `session`?                                          |

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use pursuit_core::dynamics::{from_relative, AgentState, ControlBounds, ControlInput, RelativeState};
use pursuit_core::episode::{EpisodeConfig, EpisodeStatus};
use pursuit_core::perception::{FovModel, KalmanState};
use pursuit_core::pursuer::PursuerPolicySpec;

pub type SessionId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// Ticks on a wall-clock timer.
    #[default]
    Realtime,
    /// Ticks only on `step` messages; used for scripted, exactly aligned replays.
    Manual,
}

/// A pursuer given either by name (`"game"`) or as a full tagged spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PursuerChoice {
    Name(String),
    Spec(PursuerPolicySpec),
}

impl PursuerChoice {
    pub fn resolve(&self) -> Result<PursuerPolicySpec, String> {
        match self {
            PursuerChoice::Name(n) => n.parse().map_err(|e: pursuit_core::Error| e.to_string()),
            PursuerChoice::Spec(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Create {
        pursuer: PursuerChoice,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        tick_ms: Option<u64>,
        #[serde(default)]
        clock: Clock,
        #[serde(default)]
        config: Option<EpisodeConfig>,
    },
    Control {
        session: SessionId,
        v: f64,
        omega: f64,
    },
    Step {
        session: SessionId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    CapacityExceeded,
    UnknownSession,
    SessionEnded,
    InvalidRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl From<&AgentState> for Pose {
    fn from(s: &AgentState) -> Self {
        Pose {
            x: s.px,
            y: s.py,
            theta: s.theta,
        }
    }
}

/// 1-σ ellipse of the belief position covariance, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Orientation of the major axis, radians from world +x.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    /// Mean relative state `(x, y, θ)` in the pursuer's body frame.
    pub mean: [f64; 3],
    /// Row-major 3×3 covariance.
    pub cov: [[f64; 3]; 3],
    pub cov_trace: f64,
    pub ellipse: Ellipse,
}

impl Belief {
    pub fn new(k: &KalmanState, pursuer: &AgentState) -> Self {
        let mut cov = [[0.0; 3]; 3];
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = k.cov[(i, j)];
            }
        }
        let centre = from_relative(pursuer, &k.mean);
        let block = Matrix2::new(k.cov[(0, 0)], k.cov[(0, 1)], k.cov[(1, 0)], k.cov[(1, 1)]);
        let eig = SymmetricEigen::new(block);
        let (major, minor) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
        let axis = eig.eigenvectors.column(major);
        Belief {
            mean: k.mean.as_array(),
            cov,
            cov_trace: k.trace(),
            ellipse: Ellipse {
                cx: centre.px,
                cy: centre.py,
                semi_major: eig.eigenvalues[major].max(0.0).sqrt(),
                semi_minor: eig.eigenvalues[minor].max(0.0).sqrt(),
                angle: axis[1].atan2(axis[0]) + pursuer.theta,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovCone {
    pub half_angle: f64,
    pub max_range: f64,
}

impl From<&FovModel> for FovCone {
    fn from(f: &FovModel) -> Self {
        FovCone {
            half_angle: f.half_angle,
            max_range: f.max_range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub v: f64,
    pub omega: f64,
}

impl From<ControlInput> for Control {
    fn from(u: ControlInput) -> Self {
        Control { v: u.v, omega: u.omega }
    }
}

/// Snapshot of one tick, sent after the tick's perception step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub session: SessionId,
    pub tick: usize,
    pub t: f64,
    pub status: EpisodeStatus,
    pub pursuer: Pose,
    pub evader: Pose,
    pub detection: bool,
    /// Noisy relative measurement, when detected.
    pub measurement: Option<[f64; 3]>,
    pub belief: Belief,
    pub fov: FovCone,
    pub reward: f64,
    pub discounted_return: f64,
    pub time_to_capture: Option<f64>,
    /// Evader control currently held for the next tick.
    pub evader_control: Control,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Created {
        session: SessionId,
        tick_ms: u64,
        clock: Clock,
        horizon: f64,
        dt: f64,
        capture_radius: f64,
        evader_bounds: ControlBounds,
    },
    Ack {
        session: SessionId,
        v: f64,
        omega: f64,
    },
    Frame(Frame),
    End {
        session: SessionId,
        status: EpisodeStatus,
        time_to_capture: Option<f64>,
        discounted_return: f64,
        ticks: usize,
    },
    Error {
        code: ErrorCode,
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session: Option<SessionId>,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>, session: Option<SessionId>) -> Self {
        ServerMessage::Error {
            code,
            message: message.into(),
            session,
        }
    }
}

pub(crate) fn measurement(d: Option<&RelativeState>) -> Option<[f64; 3]> {
    d.map(RelativeState::as_array)
}
