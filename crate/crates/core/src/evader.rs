//! Evader behavior models.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AgentState, ControlBounds, ControlInput, RelativeState};
use crate::error::{Error, Result};
use crate::hji::{decision_time_to_go, optimal_evader_control, GameControl, ValueFunction};
use crate::rng::SimRng;

/// Radial spawn offset range around the pursuer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpawnConfig {
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for SpawnConfig {
    fn default() -> Self {
        Self { r_min: 2.0, r_max: 6.0 }
    }
}

impl SpawnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_min > 0.0 && self.r_min <= self.r_max && self.r_max.is_finite() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(format!(
                "spawn radii must satisfy 0 < r_min <= r_max, got [{}, {}]",
                self.r_min, self.r_max
            )))
        }
    }
}

/// Evader pose for a given radial draw: offset `(r cos ψ, r sin ψ)` from the
/// pursuer, heading `ψ` so that it faces away.
pub fn spawn_at(pursuer: &AgentState, r: f64, psi: f64) -> AgentState {
    AgentState::new(pursuer.px + r * psi.cos(), pursuer.py + r * psi.sin(), psi)
}

pub fn spawn_evader<R: Rng + ?Sized>(pursuer: &AgentState, cfg: &SpawnConfig, rng: &mut R) -> AgentState {
    let r = if cfg.r_min < cfg.r_max {
        rng.random_range(cfg.r_min..=cfg.r_max)
    } else {
        cfg.r_min
    };
    let psi = rng.random_range(-PI..=PI);
    spawn_at(pursuer, r, psi)
}

/// The 5×5 primitive set `{v_min, v_min/2, 0, v_max/2, v_max} × {ω_min, ω_min/2, 0, ω_max/2, ω_max}`,
/// duplicates included.
pub fn primitive_grid(b: &ControlBounds) -> Vec<ControlInput> {
    let vs = [b.v_min, 0.5 * b.v_min, 0.0, 0.5 * b.v_max, b.v_max];
    let ws = [b.omega_min, 0.5 * b.omega_min, 0.0, 0.5 * b.omega_max, b.omega_max];
    vs.iter()
        .flat_map(|&v| ws.iter().map(move |&w| ControlInput::new(v, w)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsParams {
    pub tau_fwd: f64,
    pub tau_turn: f64,
    /// +1 turns at `ω_max`, −1 at `ω_min`.
    pub current_turn_sign: i8,
    pub opposite_turn_prob: f64,
}

impl DubinsParams {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let tau_fwd = rng.random_range(2.0..=4.0);
        let tau_turn = rng.random_range(0.6..=1.4);
        let current_turn_sign = if rng.random_bool(0.5) { 1 } else { -1 };
        Self {
            tau_fwd,
            tau_turn,
            current_turn_sign,
            opposite_turn_prob: 0.7,
        }
    }
}

/// Straight runs of `τ_fwd` alternating with full-rate turns of `τ_turn`,
/// both at top speed.
#[derive(Debug, Clone)]
pub struct DubinsPolicy {
    params: DubinsParams,
    turns_started: u64,
    rng: SimRng,
}

impl DubinsPolicy {
    pub fn new(mut rng: SimRng) -> Self {
        let params = DubinsParams::sample(&mut rng);
        Self::with_params(params, rng)
    }

    pub fn with_params(params: DubinsParams, rng: SimRng) -> Self {
        Self {
            params,
            turns_started: 0,
            rng,
        }
    }

    pub fn params(&self) -> &DubinsParams {
        &self.params
    }

    /// Draws the direction of the next turn phase; the first turn keeps the
    /// initial coin flip.
    pub fn begin_turn(&mut self) -> i8 {
        if self.turns_started > 0 && self.rng.random_bool(self.params.opposite_turn_prob) {
            self.params.current_turn_sign = -self.params.current_turn_sign;
        }
        self.turns_started += 1;
        self.params.current_turn_sign
    }

    /// Whether `t` falls in a forward phase, and the index of its cycle.
    pub fn phase(&self, t: f64) -> (bool, u64) {
        let cycle = self.params.tau_fwd + self.params.tau_turn;
        let index = (t / cycle).floor().max(0.0);
        let into = t - index * cycle;
        (into < self.params.tau_fwd, index as u64)
    }

    pub fn step(&mut self, t: f64, b: &ControlBounds) -> ControlInput {
        let (forward, cycle) = self.phase(t);
        if forward {
            return ControlInput::new(b.v_max, 0.0);
        }
        while self.turns_started <= cycle {
            self.begin_turn();
        }
        let omega = if self.params.current_turn_sign > 0 {
            b.omega_max
        } else {
            b.omega_min
        };
        ControlInput::new(b.v_max, omega)
    }
}

/// Piecewise-constant random primitives, resampled every `hold` seconds.
#[derive(Debug, Clone)]
pub struct RandomPrimitivePolicy {
    hold: f64,
    primitives: Vec<ControlInput>,
    current: ControlInput,
    window: Option<u64>,
    rng: SimRng,
}

impl RandomPrimitivePolicy {
    pub fn new(bounds: &ControlBounds, mut rng: SimRng) -> Self {
        let hold = rng.random_range(1.0..=3.0);
        Self::with_hold(bounds, hold, rng)
    }

    pub fn with_hold(bounds: &ControlBounds, hold: f64, rng: SimRng) -> Self {
        Self {
            hold,
            primitives: primitive_grid(bounds),
            current: ControlInput::ZERO,
            window: None,
            rng,
        }
    }

    pub fn hold(&self) -> f64 {
        self.hold
    }

    /// Draws a new primitive uniformly and returns its slot in the grid.
    pub fn resample_index(&mut self) -> usize {
        let i = self.rng.random_range(0..self.primitives.len());
        self.current = self.primitives[i];
        i
    }

    pub fn step(&mut self, t: f64) -> ControlInput {
        let window = (t / self.hold).floor().max(0.0) as u64;
        if self.window.is_none_or(|w| w < window) {
            self.window = Some(window);
            self.resample_index();
        }
        self.current
    }
}

/// Game-optimal evasion read off the value function.
#[derive(Debug, Clone)]
pub struct GameEvader {
    value: Arc<ValueFunction>,
    pursuer_bounds: ControlBounds,
    evader_bounds: ControlBounds,
}

impl GameEvader {
    pub fn new(value: Arc<ValueFunction>, pursuer_bounds: ControlBounds, evader_bounds: ControlBounds) -> Self {
        Self {
            value,
            pursuer_bounds,
            evader_bounds,
        }
    }

    /// `x_rel_e` is the pursuer's pose in the evader's body frame. The value
    /// function lives in the pursuer's frame, so the query is inverted first;
    /// the evader's own controls are frame independent.
    pub fn step(&self, x_rel_e: &RelativeState, time_to_go: f64) -> Result<GameControl> {
        let x = x_rel_e.inverted();
        let clamped = !self.value.contains(&x);
        let x = self.value.clamp_to_grid(&x);
        let s = decision_time_to_go(&self.value, &x, time_to_go)?;
        let control = optimal_evader_control(&self.value, &x, s, &self.pursuer_bounds, &self.evader_bounds)?;
        Ok(GameControl {
            control,
            clamped,
            time_to_go: s,
        })
    }
}

/// Game-optimal evader that, with probability ε per tick, applies the
/// current random primitive instead.
#[derive(Debug, Clone)]
pub struct NoisyGameEvader {
    game: GameEvader,
    random: RandomPrimitivePolicy,
    epsilon: f64,
    last_was_noise: bool,
    rng: SimRng,
}

impl NoisyGameEvader {
    pub fn new(game: GameEvader, bounds: &ControlBounds, epsilon: f64, mut rng: SimRng) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::ConfigInvalid(format!("epsilon {epsilon} not in [0, 1]")));
        }
        let hold = rng.random_range(1.0..=3.0);
        let mut primitive_rng = rng.clone();
        primitive_rng.set_stream(rng.get_stream().wrapping_add(1 << 32));
        Ok(Self {
            game,
            random: RandomPrimitivePolicy::with_hold(bounds, hold, primitive_rng),
            epsilon,
            last_was_noise: false,
            rng,
        })
    }

    pub fn last_was_noise(&self) -> bool {
        self.last_was_noise
    }

    pub fn step(&mut self, x_rel_e: &RelativeState, t: f64, time_to_go: f64) -> Result<GameControl> {
        let primitive = self.random.step(t);
        self.last_was_noise = self.rng.random_bool(self.epsilon);
        if self.last_was_noise {
            Ok(GameControl {
                control: primitive,
                clamped: false,
                time_to_go,
            })
        } else {
            self.game.step(x_rel_e, time_to_go)
        }
    }
}

pub fn straight_step(b: &ControlBounds) -> ControlInput {
    ControlInput::new(b.v_max, 0.0)
}

/// Serializable evader selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvaderPolicySpec {
    Dubins,
    Random,
    Game,
    NoisyGame {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Straight,
}

fn default_epsilon() -> f64 {
    0.2
}

impl EvaderPolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            EvaderPolicySpec::Dubins => "dubins",
            EvaderPolicySpec::Random => "random",
            EvaderPolicySpec::Game => "game",
            EvaderPolicySpec::NoisyGame { .. } => "noisy-game",
            EvaderPolicySpec::Straight => "straight",
        }
    }

    pub fn needs_value(&self) -> bool {
        matches!(self, EvaderPolicySpec::Game | EvaderPolicySpec::NoisyGame { .. })
    }
}

impl std::str::FromStr for EvaderPolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dubins" => Ok(EvaderPolicySpec::Dubins),
            "random" => Ok(EvaderPolicySpec::Random),
            "game" => Ok(EvaderPolicySpec::Game),
            "noisy-game" => Ok(EvaderPolicySpec::NoisyGame {
                epsilon: default_epsilon(),
            }),
            "straight" => Ok(EvaderPolicySpec::Straight),
            other => Err(Error::ConfigInvalid(format!(
                "unknown evader `{other}` (expected dubins, random, game, noisy-game or straight)"
            ))),
        }
    }
}

/// What the evader sees each tick.
#[derive(Debug, Clone, Copy)]
pub struct EvaderObservation {
    pub t: f64,
    pub time_to_go: f64,
    /// Pursuer pose in the evader's body frame.
    pub pursuer_rel: RelativeState,
}

/// An instantiated evader with its per-episode state.
#[derive(Debug, Clone)]
pub enum EvaderPolicy {
    Dubins(DubinsPolicy),
    Random(RandomPrimitivePolicy),
    Game(GameEvader),
    NoisyGame(NoisyGameEvader),
    Straight,
}

impl EvaderPolicy {
    pub fn new(
        spec: &EvaderPolicySpec,
        value: Option<&Arc<ValueFunction>>,
        pursuer_bounds: &ControlBounds,
        evader_bounds: &ControlBounds,
        rng: SimRng,
    ) -> Result<Self> {
        let game = || -> Result<GameEvader> {
            let v = value.ok_or(Error::MissingValueFunction("game evader"))?;
            Ok(GameEvader::new(v.clone(), *pursuer_bounds, *evader_bounds))
        };
        Ok(match spec {
            EvaderPolicySpec::Dubins => EvaderPolicy::Dubins(DubinsPolicy::new(rng)),
            EvaderPolicySpec::Random => EvaderPolicy::Random(RandomPrimitivePolicy::new(evader_bounds, rng)),
            EvaderPolicySpec::Game => EvaderPolicy::Game(game()?),
            EvaderPolicySpec::NoisyGame { epsilon } => {
                EvaderPolicy::NoisyGame(NoisyGameEvader::new(game()?, evader_bounds, *epsilon, rng)?)
            }
            EvaderPolicySpec::Straight => EvaderPolicy::Straight,
        })
    }

    /// Next control and whether a value query had to be clamped.
    pub fn act(&mut self, obs: &EvaderObservation, bounds: &ControlBounds) -> Result<(ControlInput, bool)> {
        Ok(match self {
            EvaderPolicy::Dubins(p) => (p.step(obs.t, bounds), false),
            EvaderPolicy::Random(p) => (p.step(obs.t), false),
            EvaderPolicy::Game(p) => {
                let g = p.step(&obs.pursuer_rel, obs.time_to_go)?;
                (g.control, g.clamped)
            }
            EvaderPolicy::NoisyGame(p) => {
                let g = p.step(&obs.pursuer_rel, obs.t, obs.time_to_go)?;
                (g.control, g.clamped)
            }
            EvaderPolicy::Straight => (straight_step(bounds), false),
        })
    }
}
