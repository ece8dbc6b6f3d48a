//! Pursuer policies.
//!
//! All of them act on relative states in the pursuer's body frame: the true
//! state (reactive, game), a privileged forecast of the evader (lookahead) or
//! the filter belief (search-and-track).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{clamp_control, ControlBounds, ControlInput, RelativeState};
use crate::error::{Error, Result};
use crate::hji::{decision_time_to_go, optimal_pursuer_control, GameControl, ValueFunction};
use crate::perception::KalmanState;

pub const DEFAULT_TURN_GAIN: f64 = 3.0;
/// Forecast length in ticks (1.6 s at the default step).
pub const DEFAULT_LOOKAHEAD_STEPS: usize = 8;
pub const DEFAULT_SEARCH_THRESHOLD: f64 = 1.5;

/// Steer toward the target's bearing, slowing down when it is off-axis.
pub fn pure_pursuit(x: &RelativeState, b: &ControlBounds, gain: f64) -> ControlInput {
    let bearing = x.bearing();
    clamp_control(
        ControlInput::new(b.v_max * bearing.cos().max(0.0), gain * bearing),
        b,
    )
}

/// Index of the forecast point the pursuer aims at: the earliest `k` with
/// `|β_k|/ω_max + d_k/v_max ≤ k·dt`, or the last point if none qualifies.
pub fn intercept_index(future: &[RelativeState], b: &ControlBounds, dt: f64) -> Result<usize> {
    if future.is_empty() {
        return Err(Error::EmptyForecast);
    }
    let turn = b.turn_extent();
    let speed = b.v_max;
    let reachable = |k: usize, x: &RelativeState| {
        let turn_time = if turn > 0.0 { x.bearing().abs() / turn } else { f64::INFINITY };
        let run_time = if speed > 0.0 { x.range() / speed } else { f64::INFINITY };
        turn_time + run_time <= k as f64 * dt
    };
    Ok(future
        .iter()
        .enumerate()
        .position(|(k, x)| reachable(k, x))
        .unwrap_or(future.len() - 1))
}

/// Pure pursuit toward the earliest reachable point of a privileged forecast.
/// `future[k]` is the evader `k` ticks ahead, in the current pursuer frame.
pub fn lookahead_intercept(future: &[RelativeState], b: &ControlBounds, dt: f64, gain: f64) -> Result<ControlInput> {
    let k = intercept_index(future, b, dt)?;
    Ok(pure_pursuit(&future[k], b, gain))
}

/// Game-optimal pursuit. Queries outside the grid are clamped onto its
/// boundary and flagged.
pub fn game_pursuer(
    v: &ValueFunction,
    x: &RelativeState,
    time_to_go: f64,
    bp: &ControlBounds,
    be: &ControlBounds,
) -> Result<GameControl> {
    let clamped = !v.contains(x);
    let x = v.clamp_to_grid(x);
    let s = decision_time_to_go(v, &x, time_to_go.max(0.0))?;
    let control = optimal_pursuer_control(v, &x, s, bp, be)?;
    Ok(GameControl {
        control,
        clamped,
        time_to_go: s,
    })
}

/// Rotate in place toward the belief mean while the belief is vague, pursue
/// the mean once it is tight.
pub fn search_and_track(k: &KalmanState, threshold: f64, gain: f64, b: &ControlBounds) -> ControlInput {
    if k.trace() > threshold {
        let bearing = k.mean.bearing();
        let omega = if bearing < 0.0 && bearing > -PI {
            b.omega_min
        } else {
            b.omega_max
        };
        clamp_control(ControlInput::new(0.0, omega), b)
    } else {
        pure_pursuit(&k.mean, b, gain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PursuerPolicySpec {
    Reactive {
        #[serde(default = "default_gain")]
        gain: f64,
    },
    Lookahead {
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_gain")]
        gain: f64,
    },
    Game,
    SearchTrack {
        #[serde(default = "default_threshold")]
        threshold: f64,
        #[serde(default = "default_gain")]
        gain: f64,
    },
}

fn default_gain() -> f64 {
    DEFAULT_TURN_GAIN
}

fn default_steps() -> usize {
    DEFAULT_LOOKAHEAD_STEPS
}

fn default_threshold() -> f64 {
    DEFAULT_SEARCH_THRESHOLD
}

impl PursuerPolicySpec {
    pub fn reactive() -> Self {
        PursuerPolicySpec::Reactive { gain: default_gain() }
    }

    pub fn lookahead() -> Self {
        PursuerPolicySpec::Lookahead {
            steps: default_steps(),
            gain: default_gain(),
        }
    }

    pub fn search_track() -> Self {
        PursuerPolicySpec::SearchTrack {
            threshold: default_threshold(),
            gain: default_gain(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PursuerPolicySpec::Reactive { .. } => "reactive",
            PursuerPolicySpec::Lookahead { .. } => "lookahead",
            PursuerPolicySpec::Game => "game",
            PursuerPolicySpec::SearchTrack { .. } => "search-track",
        }
    }

    pub fn needs_value(&self) -> bool {
        matches!(self, PursuerPolicySpec::Game)
    }

    /// Number of forecast states this policy consumes.
    pub fn forecast_len(&self) -> usize {
        match self {
            PursuerPolicySpec::Lookahead { steps, .. } => *steps,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PursuerPolicySpec::Lookahead { steps: 0, .. } => Err(Error::EmptyForecast),
            PursuerPolicySpec::SearchTrack { threshold, .. } if !(*threshold > 0.0) => {
                Err(Error::ConfigInvalid(format!("search threshold {threshold} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for PursuerPolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reactive" => Ok(Self::reactive()),
            "lookahead" => Ok(Self::lookahead()),
            "game" => Ok(PursuerPolicySpec::Game),
            "search-track" => Ok(Self::search_track()),
            other => Err(Error::ConfigInvalid(format!(
                "unknown pursuer `{other}` (expected reactive, lookahead, game or search-track)"
            ))),
        }
    }
}

/// Everything a pursuer may look at on one tick.
#[derive(Debug, Clone, Copy)]
pub struct PursuerObservation<'a> {
    pub truth: &'a RelativeState,
    pub belief: &'a KalmanState,
    pub forecast: &'a [RelativeState],
    pub time_to_go: f64,
    pub dt: f64,
}

/// A pursuer spec bound to its runtime inputs.
#[derive(Debug, Clone)]
pub struct PursuerPolicy {
    spec: PursuerPolicySpec,
    value: Option<Arc<ValueFunction>>,
    pursuer_bounds: ControlBounds,
    evader_bounds: ControlBounds,
}

impl PursuerPolicy {
    pub fn new(
        spec: &PursuerPolicySpec,
        value: Option<&Arc<ValueFunction>>,
        pursuer_bounds: &ControlBounds,
        evader_bounds: &ControlBounds,
    ) -> Result<Self> {
        spec.validate()?;
        if spec.needs_value() && value.is_none() {
            return Err(Error::MissingValueFunction("game pursuer"));
        }
        Ok(Self {
            spec: spec.clone(),
            value: value.cloned(),
            pursuer_bounds: *pursuer_bounds,
            evader_bounds: *evader_bounds,
        })
    }

    pub fn spec(&self) -> &PursuerPolicySpec {
        &self.spec
    }

    /// Next control and whether a value query had to be clamped.
    pub fn act(&self, obs: &PursuerObservation<'_>) -> Result<(ControlInput, bool)> {
        let b = &self.pursuer_bounds;
        Ok(match &self.spec {
            PursuerPolicySpec::Reactive { gain } => (pure_pursuit(obs.truth, b, *gain), false),
            PursuerPolicySpec::Lookahead { gain, .. } => (lookahead_intercept(obs.forecast, b, obs.dt, *gain)?, false),
            PursuerPolicySpec::Game => {
                let v = self.value.as_ref().ok_or(Error::MissingValueFunction("game pursuer"))?;
                let g = game_pursuer(v, obs.truth, obs.time_to_go, b, &self.evader_bounds)?;
                (g.control, g.clamped)
            }
            PursuerPolicySpec::SearchTrack { threshold, gain } => {
                (search_and_track(obs.belief, *threshold, *gain, b), false)
            }
        })
    }
}
