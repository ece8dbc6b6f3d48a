//! One reproducible pursuit episode.
//!
//! Every tick, from the pre-step state: sense → belief update → pursuer
//! control → evader control → clamp → step both agents simultaneously →
//! capture check on the post-step state. The record of tick `k` holds the
//! pre-step poses, the perception of that tick, both applied controls and the
//! reward `−d²`; the terminal record carries zero controls.
//!
//! [`Episode`] exposes the loop one tick at a time so that an external driver
//! (the session service) can supply the evader's controls; [`run_episode`]
//! runs it to completion with a policy-driven evader.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    clamp_control, step_unicycle, to_relative, AgentState, ControlBounds, ControlInput, RelativeState, DEFAULT_DT,
};
use crate::error::{Error, Result};
use crate::evader::{spawn_evader, EvaderObservation, EvaderPolicy, EvaderPolicySpec, SpawnConfig};
use crate::hji::{ValueFunction, CAPTURE_RADIUS};
use crate::perception::{belief_step, mat3_rows, FilterParams, FovModel, KalmanState};
use crate::pursuer::{PursuerObservation, PursuerPolicy, PursuerPolicySpec};
use crate::rng::{stream, SimRng, STREAM_EVADER, STREAM_SENSOR, STREAM_SPAWN};

/// Slack on the capture test so that closed-form capture ticks are not lost
/// to rounding in the Euler updates.
pub const CAPTURE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Episode length in seconds.
    pub horizon: f64,
    pub dt: f64,
    pub capture_radius: f64,
    pub gamma: f64,
    pub capture_bonus: f64,
    pub seed: u64,
    pub pursuer_bounds: ControlBounds,
    pub evader_bounds: ControlBounds,
    pub spawn: SpawnConfig,
    /// Overrides the random spawn when set.
    pub initial_evader: Option<AgentState>,
    pub fov: FovModel,
    pub filter: FilterParams,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            dt: DEFAULT_DT,
            capture_radius: CAPTURE_RADIUS,
            gamma: 0.99,
            capture_bonus: 80.0,
            seed: 0,
            pursuer_bounds: ControlBounds::PURSUER,
            evader_bounds: ControlBounds::EVADER,
            spawn: SpawnConfig::default(),
            initial_evader: None,
            fov: FovModel::default(),
            filter: FilterParams::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of ticks in a full-length episode.
    pub fn max_ticks(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::ConfigInvalid(msg));
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return invalid(format!("horizon {} and dt {} must be positive", self.horizon, self.dt));
        }
        let ticks = self.horizon / self.dt;
        if (ticks - ticks.round()).abs() > 1e-9 * ticks.max(1.0) {
            return invalid(format!("horizon {} is not a whole number of {} s ticks", self.horizon, self.dt));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return invalid(format!("discount {} outside (0, 1]", self.gamma));
        }
        if !(self.capture_radius > 0.0) {
            return invalid(format!("capture radius {} must be positive", self.capture_radius));
        }
        if !self.capture_bonus.is_finite() {
            return invalid("capture bonus must be finite".into());
        }
        for (who, b) in [("pursuer", &self.pursuer_bounds), ("evader", &self.evader_bounds)] {
            if !b.is_valid() {
                return invalid(format!("{who} control bounds are empty or not finite"));
            }
        }
        if let Some(e) = &self.initial_evader {
            if !e.is_finite() {
                return invalid("initial evader pose is not finite".into());
            }
        }
        self.spawn.validate()?;
        self.fov.validate()?;
        if (self.filter.dt - self.dt).abs() > 1e-12 {
            return invalid(format!("filter dt {} differs from episode dt {}", self.filter.dt, self.dt));
        }
        Ok(())
    }

    pub fn pursuer_start(&self) -> AgentState {
        AgentState::new(0.0, 0.0, 0.0)
    }

    /// Initial evader pose: the override if set, else a draw from the spawn stream.
    pub fn evader_start(&self) -> AgentState {
        match self.initial_evader {
            Some(e) => AgentState::new(e.px, e.py, e.theta),
            None => spawn_evader(&self.pursuer_start(), &self.spawn, &mut stream(self.seed, STREAM_SPAWN)),
        }
    }
}

/// Negative squared planar distance.
pub fn step_reward(pursuer: &AgentState, evader: &AgentState) -> f64 {
    -pursuer.distance_sq_to(evader)
}

/// One row of the joint trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub t: f64,
    pub pursuer: AgentState,
    pub evader: AgentState,
    pub pursuer_control: ControlInput,
    pub evader_control: ControlInput,
    pub detection: Option<RelativeState>,
    pub belief_mean: RelativeState,
    #[serde(with = "mat3_rows")]
    pub belief_cov: Matrix3<f64>,
    pub reward: f64,
}

impl TickRecord {
    pub fn cov_trace(&self) -> f64 {
        self.belief_cov.trace()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeStatus {
    Running,
    Captured,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub captured: bool,
    pub time_to_capture: Option<f64>,
    pub discounted_return: f64,
    /// Value queries that fell outside the grid and were clamped.
    pub clamped_queries: usize,
    pub initial_relative: RelativeState,
    pub trajectory: Vec<TickRecord>,
}

impl EpisodeResult {
    /// One-line JSON-friendly summary without the trajectory.
    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            seed: self.seed,
            captured: self.captured,
            time_to_capture: self.time_to_capture,
            discounted_return: self.discounted_return,
            ticks: self.trajectory.len(),
            clamped_queries: self.clamped_queries,
            initial_relative: self.initial_relative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub captured: bool,
    pub time_to_capture: Option<f64>,
    pub discounted_return: f64,
    pub ticks: usize,
    pub clamped_queries: usize,
    pub initial_relative: RelativeState,
}

/// Discounted return recomputed from a trajectory.
pub fn discounted_return(trajectory: &[TickRecord], captured: bool, cfg: &EpisodeConfig) -> f64 {
    let ret: f64 = trajectory
        .iter()
        .map(|r| cfg.gamma.powi(r.tick as i32) * r.reward)
        .sum();
    let bonus = match (captured, trajectory.last()) {
        (true, Some(last)) => cfg.gamma.powi(last.tick as i32) * cfg.capture_bonus,
        _ => 0.0,
    };
    ret + bonus
}

/// Who chooses the evader's controls.
#[derive(Debug, Clone)]
pub enum EvaderDriver {
    Policy(EvaderPolicy),
    /// Controls arrive from outside, one per tick.
    External,
}

/// A running episode, advanced one tick at a time.
#[derive(Debug, Clone)]
pub struct Episode {
    cfg: EpisodeConfig,
    pursuer_policy: PursuerPolicy,
    evader_driver: EvaderDriver,
    sensor_rng: SimRng,
    pursuer: AgentState,
    evader: AgentState,
    belief: KalmanState,
    detection: Option<RelativeState>,
    prev_pursuer_control: Option<ControlInput>,
    prev_evader_control: ControlInput,
    tick: usize,
    status: EpisodeStatus,
    clamped_queries: usize,
    initial_relative: RelativeState,
    trajectory: Vec<TickRecord>,
}

impl Episode {
    /// Sets up the scene and perceives tick 0. An evader spawned inside the
    /// capture disc ends the episode immediately.
    pub fn new(
        pp: &PursuerPolicySpec,
        ep: Option<&EvaderPolicySpec>,
        cfg: &EpisodeConfig,
        value: Option<&Arc<ValueFunction>>,
    ) -> Result<Self> {
        cfg.validate()?;
        let pursuer_policy = PursuerPolicy::new(pp, value, &cfg.pursuer_bounds, &cfg.evader_bounds)?;
        let evader_driver = match ep {
            Some(spec) => EvaderDriver::Policy(EvaderPolicy::new(
                spec,
                value,
                &cfg.pursuer_bounds,
                &cfg.evader_bounds,
                stream(cfg.seed, STREAM_EVADER),
            )?),
            None => EvaderDriver::External,
        };
        let pursuer = cfg.pursuer_start();
        let evader = cfg.evader_start();
        let mut episode = Self {
            cfg: cfg.clone(),
            pursuer_policy,
            evader_driver,
            sensor_rng: stream(cfg.seed, STREAM_SENSOR),
            pursuer,
            evader,
            belief: KalmanState::initial(&cfg.filter),
            detection: None,
            prev_pursuer_control: None,
            prev_evader_control: ControlInput::ZERO,
            tick: 0,
            status: EpisodeStatus::Running,
            clamped_queries: 0,
            initial_relative: to_relative(&pursuer, &evader),
            trajectory: Vec::new(),
        };
        episode.perceive()?;
        episode.check_termination();
        Ok(episode)
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn status(&self) -> EpisodeStatus {
        self.status
    }

    pub fn is_done(&self) -> bool {
        self.status != EpisodeStatus::Running
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.dt
    }

    pub fn pursuer(&self) -> &AgentState {
        &self.pursuer
    }

    pub fn evader(&self) -> &AgentState {
        &self.evader
    }

    pub fn belief(&self) -> &KalmanState {
        &self.belief
    }

    pub fn detection(&self) -> Option<&RelativeState> {
        self.detection.as_ref()
    }

    pub fn trajectory(&self) -> &[TickRecord] {
        &self.trajectory
    }

    pub fn current_reward(&self) -> f64 {
        step_reward(&self.pursuer, &self.evader)
    }

    pub fn time_to_capture(&self) -> Option<f64> {
        (self.status == EpisodeStatus::Captured).then(|| self.time())
    }

    pub fn discounted_return(&self) -> f64 {
        discounted_return(&self.trajectory, self.status == EpisodeStatus::Captured, &self.cfg)
    }

    /// Advances one tick. `evader_control` is required for an externally
    /// driven evader and ignored otherwise. Returns the completed record.
    pub fn step(&mut self, evader_control: Option<ControlInput>) -> Result<&TickRecord> {
        if self.is_done() {
            return Err(Error::ConfigInvalid("episode already finished".into()));
        }
        let truth = to_relative(&self.pursuer, &self.evader);
        let t = self.time();
        let time_to_go = (self.cfg.horizon - t).max(0.0);

        let forecast = self.forecast(self.pursuer_policy.spec().forecast_len())?;
        let (u_p, clamped_p) = self.pursuer_policy.act(&PursuerObservation {
            truth: &truth,
            belief: &self.belief,
            forecast: &forecast,
            time_to_go,
            dt: self.cfg.dt,
        })?;
        let (u_e, clamped_e) = match &mut self.evader_driver {
            EvaderDriver::Policy(policy) => policy.act(
                &EvaderObservation {
                    t,
                    time_to_go,
                    pursuer_rel: truth.inverted(),
                },
                &self.cfg.evader_bounds,
            )?,
            EvaderDriver::External => (
                evader_control.ok_or_else(|| Error::ConfigInvalid("externally driven evader needs a control".into()))?,
                false,
            ),
        };
        self.clamped_queries += usize::from(clamped_p) + usize::from(clamped_e);
        let u_p = clamp_control(u_p, &self.cfg.pursuer_bounds);
        let u_e = clamp_control(u_e, &self.cfg.evader_bounds);

        self.push_record(u_p, u_e);
        self.pursuer = step_unicycle(&self.pursuer, &u_p, self.cfg.dt);
        self.evader = step_unicycle(&self.evader, &u_e, self.cfg.dt);
        self.prev_pursuer_control = Some(u_p);
        self.prev_evader_control = u_e;
        self.tick += 1;
        self.perceive()?;
        self.check_termination();
        Ok(self.trajectory.last().expect("record just pushed"))
    }

    /// Runs a policy-driven episode to its end.
    pub fn run(mut self) -> Result<EpisodeResult> {
        while !self.is_done() {
            self.step(None)?;
        }
        Ok(self.into_result())
    }

    pub fn into_result(self) -> EpisodeResult {
        let captured = self.status == EpisodeStatus::Captured;
        EpisodeResult {
            seed: self.cfg.seed,
            captured,
            time_to_capture: self.time_to_capture(),
            discounted_return: self.discounted_return(),
            clamped_queries: self.clamped_queries,
            initial_relative: self.initial_relative,
            trajectory: self.trajectory,
        }
    }

    fn perceive(&mut self) -> Result<()> {
        let (belief, detection) = belief_step(
            &self.belief,
            &self.pursuer,
            &self.evader,
            self.prev_pursuer_control.as_ref(),
            &self.cfg.fov,
            &self.cfg.filter,
            &mut self.sensor_rng,
        )?;
        self.belief = belief;
        self.detection = detection.map(|d| d.measurement);
        Ok(())
    }

    fn check_termination(&mut self) {
        let status = if self.pursuer.distance_to(&self.evader) <= self.cfg.capture_radius + CAPTURE_EPS {
            EpisodeStatus::Captured
        } else if self.tick >= self.cfg.max_ticks() {
            EpisodeStatus::TimedOut
        } else {
            return;
        };
        self.status = status;
        self.push_record(ControlInput::ZERO, ControlInput::ZERO);
    }

    fn push_record(&mut self, u_p: ControlInput, u_e: ControlInput) {
        self.trajectory.push(TickRecord {
            tick: self.tick,
            t: self.time(),
            pursuer: self.pursuer,
            evader: self.evader,
            pursuer_control: u_p,
            evader_control: u_e,
            detection: self.detection,
            belief_mean: self.belief.mean,
            belief_cov: self.belief.cov,
            reward: self.current_reward(),
        });
    }

    /// Privileged forecast: the evader `k = 0..n` ticks ahead, in the current
    /// pursuer frame. A policy-driven evader is rolled forward on a copy of
    /// its own state (random draws included) while the pursuer repeats its
    /// previous command; an external evader is extrapolated with its last
    /// control.
    fn forecast(&self, n: usize) -> Result<Vec<RelativeState>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let dt = self.cfg.dt;
        let u_p = self.prev_pursuer_control.unwrap_or(ControlInput::ZERO);
        let mut pursuer = self.pursuer;
        let mut evader = self.evader;
        let mut policy = match &self.evader_driver {
            EvaderDriver::Policy(p) => Some(p.clone()),
            EvaderDriver::External => None,
        };
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(to_relative(&self.pursuer, &evader));
            if k + 1 == n {
                break;
            }
            let t = self.time() + k as f64 * dt;
            let u_e = match policy.as_mut() {
                Some(p) => {
                    p.act(
                        &EvaderObservation {
                            t,
                            time_to_go: (self.cfg.horizon - t).max(0.0),
                            pursuer_rel: to_relative(&evader, &pursuer),
                        },
                        &self.cfg.evader_bounds,
                    )?
                    .0
                }
                None => self.prev_evader_control,
            };
            evader = step_unicycle(&evader, &clamp_control(u_e, &self.cfg.evader_bounds), dt);
            pursuer = step_unicycle(&pursuer, &u_p, dt);
        }
        Ok(out)
    }
}

pub fn run_episode(
    pp: &PursuerPolicySpec,
    ep: &EvaderPolicySpec,
    cfg: &EpisodeConfig,
    value: Option<&Arc<ValueFunction>>,
) -> Result<EpisodeResult> {
    Episode::new(pp, Some(ep), cfg, value)?.run()
}

pub const TRAJECTORY_HEADER: [&str; 17] = [
    "t", "px_p", "py_p", "th_p", "px_e", "py_e", "th_e", "v_p", "w_p", "v_e", "w_e", "det_flag", "xhat", "yhat",
    "thhat", "cov_trace", "reward",
];

/// Writes one CSV row per tick in [`TRAJECTORY_HEADER`] order.
pub fn write_trajectory_csv<W: Write>(trajectory: &[TickRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for r in trajectory {
        let row = [
            r.t,
            r.pursuer.px,
            r.pursuer.py,
            r.pursuer.theta,
            r.evader.px,
            r.evader.py,
            r.evader.theta,
            r.pursuer_control.v,
            r.pursuer_control.omega,
            r.evader_control.v,
            r.evader_control.omega,
            if r.detection.is_some() { 1.0 } else { 0.0 },
            r.belief_mean.px_rel,
            r.belief_mean.py_rel,
            r.belief_mean.theta_rel,
            r.cov_trace(),
            r.reward,
        ];
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush().map_err(|e| Error::io("<trajectory>", e))?;
    Ok(())
}

pub fn save_trajectory_csv(trajectory: &[TickRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory_csv(trajectory, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hji::Grid3D;
    use proptest::prelude::*;

    fn aligned(gap: f64) -> EpisodeConfig {
        EpisodeConfig {
            initial_evader: Some(AgentState::new(gap, 0.0, 0.0)),
            ..EpisodeConfig::default()
        }
    }

    #[test]
    fn reward_examples() {
        let o = AgentState::new(0.0, 0.0, 0.0);
        assert_eq!(step_reward(&o, &o), 0.0);
        assert_eq!(step_reward(&o, &AgentState::new(2.0, 0.0, 1.0)), -4.0);
        assert_eq!(step_reward(&o, &AgentState::new(3.0, 4.0, 0.0)), -25.0);
    }

    #[test]
    fn spawn_inside_capture_disc_ends_at_once() {
        let r = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &aligned(0.5), None).unwrap();
        assert!(r.captured);
        assert_eq!(r.time_to_capture, Some(0.0));
        assert_eq!(r.trajectory.len(), 1);
        assert!((r.discounted_return - (80.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn straight_evader_closed_form() {
        let r = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &aligned(2.0), None).unwrap();
        assert!(r.captured);
        assert_eq!(r.trajectory.len(), 13);
        assert!((r.time_to_capture.unwrap() - 2.4).abs() < 1e-9);
    }

    #[test]
    fn immobile_evader_closed_form() {
        let cfg = EpisodeConfig {
            evader_bounds: ControlBounds {
                v_max: 0.0,
                ..ControlBounds::EVADER
            },
            ..aligned(5.0)
        };
        let r = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &cfg, None).unwrap();
        let ticks = ((5.0f64 - 0.8) / 3.0 / 0.2).ceil() as usize;
        assert_eq!(ticks, 7);
        assert_eq!(r.trajectory.len(), ticks + 1);
    }

    #[test]
    fn equal_speed_flight_times_out() {
        let cfg = EpisodeConfig {
            evader_bounds: ControlBounds {
                v_max: 3.0,
                ..ControlBounds::EVADER
            },
            ..aligned(3.0)
        };
        let r = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &cfg, None).unwrap();
        assert!(!r.captured);
        assert_eq!(r.time_to_capture, None);
        assert_eq!(r.trajectory.len(), 101);
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut EpisodeConfig)| {
            let mut c = EpisodeConfig::default();
            f(&mut c);
            matches!(c.validate(), Err(Error::ConfigInvalid(_)))
        };
        assert!(EpisodeConfig::default().validate().is_ok());
        assert!(bad(|c| c.horizon = 20.1));
        assert!(bad(|c| c.gamma = 0.0));
        assert!(bad(|c| c.gamma = 1.01));
        assert!(bad(|c| c.capture_radius = 0.0));
        assert!(bad(|c| c.dt = 0.1));
    }

    #[test]
    fn game_policies_need_a_value_function() {
        let cfg = EpisodeConfig::default();
        assert!(matches!(
            run_episode(&PursuerPolicySpec::Game, &EvaderPolicySpec::Random, &cfg, None),
            Err(Error::MissingValueFunction(_))
        ));
        assert!(matches!(
            run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Game, &cfg, None),
            Err(Error::MissingValueFunction(_))
        ));
    }

    #[test]
    fn external_driver_matches_policy_replay() {
        let cfg = EpisodeConfig::default().with_seed(11);
        let offline = run_episode(&PursuerPolicySpec::search_track(), &EvaderPolicySpec::Random, &cfg, None).unwrap();
        let mut live = Episode::new(&PursuerPolicySpec::search_track(), None, &cfg, None).unwrap();
        for r in &offline.trajectory[..offline.trajectory.len() - 1] {
            live.step(Some(r.evader_control)).unwrap();
        }
        assert!(live.is_done());
        assert_eq!(live.into_result(), offline);
    }

    #[test]
    fn trajectory_csv_layout() {
        let r = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &aligned(2.0), None).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&r.trajectory, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,px_p,py_p,th_p,px_e,py_e,th_e,v_p,w_p,v_e,w_e,det_flag,xhat,yhat,thhat,cov_trace,reward"
        );
        assert_eq!(lines.count(), r.trajectory.len());
    }

    #[test]
    fn game_vs_game_runs_on_small_grid() {
        let v = Arc::new(
            ValueFunction::from_fn(Grid3D::square(5.0, 21, 12), 0.2, 6, |x, y, _, s| x.hypot(y) - 0.8 - 0.5 * s)
                .unwrap(),
        );
        let r = run_episode(&PursuerPolicySpec::Game, &EvaderPolicySpec::Game, &EpisodeConfig::default().with_seed(2), Some(&v))
            .unwrap();
        assert_eq!(r.captured, r.time_to_capture.is_some());
    }

    fn pursuer_strategy() -> impl Strategy<Value = PursuerPolicySpec> {
        prop_oneof![
            Just(PursuerPolicySpec::reactive()),
            Just(PursuerPolicySpec::lookahead()),
            Just(PursuerPolicySpec::search_track()),
        ]
    }

    fn evader_strategy() -> impl Strategy<Value = EvaderPolicySpec> {
        prop_oneof![
            Just(EvaderPolicySpec::Dubins),
            Just(EvaderPolicySpec::Random),
            Just(EvaderPolicySpec::Straight),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn episode_invariants(pp in pursuer_strategy(), ep in evader_strategy(), seed in 0u64..10_000) {
            let cfg = EpisodeConfig::default().with_seed(seed);
            let r = run_episode(&pp, &ep, &cfg, None).unwrap();
            // reproducibility
            prop_assert_eq!(&r, &run_episode(&pp, &ep, &cfg, None).unwrap());
            // reward ledger
            prop_assert!((r.discounted_return - discounted_return(&r.trajectory, r.captured, &cfg)).abs() < 1e-9);
            // length and flag consistency
            prop_assert_eq!(r.captured, r.time_to_capture.is_some());
            let expected_len = match r.time_to_capture {
                Some(t) => (t / cfg.dt).round() as usize + 1,
                None => cfg.max_ticks() + 1,
            };
            prop_assert_eq!(r.trajectory.len(), expected_len);
            // capture consistency
            let min_d = r.trajectory.iter().map(|k| k.pursuer.distance_to(&k.evader)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(r.captured, min_d <= cfg.capture_radius + CAPTURE_EPS);
            // no teleportation
            for w in r.trajectory.windows(2) {
                prop_assert!(w[0].pursuer.distance_to(&w[1].pursuer) <= cfg.pursuer_bounds.v_max * cfg.dt + 1e-9);
                prop_assert!(w[0].evader.distance_to(&w[1].evader) <= cfg.evader_bounds.v_max * cfg.dt + 1e-9);
            }
        }
    }
}
