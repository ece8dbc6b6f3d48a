//! A single interactive session, independent of any transport.

use std::sync::Arc;

use pursuit_core::dynamics::{clamp_control, ControlInput};
use pursuit_core::episode::{Episode, EpisodeConfig, EpisodeResult};
use pursuit_core::hji::ValueFunction;
use pursuit_core::pursuer::PursuerPolicySpec;

use crate::error::SessionError;
use crate::protocol::{measurement, Belief, Frame, Pose, ServerMessage, SessionId};

/// Episode driven by a human evader. The latest submitted control is held
/// (zero-order hold) and applied on every tick until replaced.
#[derive(Debug)]
pub struct Session {
    id: SessionId,
    episode: Episode,
    held: ControlInput,
}

impl Session {
    pub fn new(
        id: SessionId,
        pursuer: &PursuerPolicySpec,
        cfg: &EpisodeConfig,
        value: Option<&Arc<ValueFunction>>,
    ) -> Result<Self, SessionError> {
        let episode = Episode::new(pursuer, None, cfg, value).map_err(|e| SessionError::Invalid(e.to_string()))?;
        Ok(Self {
            id,
            episode,
            held: ControlInput::ZERO,
        })
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    pub fn is_done(&self) -> bool {
        self.episode.is_done()
    }

    pub fn config(&self) -> &EpisodeConfig {
        self.episode.config()
    }

    pub fn held_control(&self) -> ControlInput {
        self.held
    }

    /// Clamps to the evader bounds and holds the control for the next tick.
    pub fn submit(&mut self, v: f64, omega: f64) -> Result<ControlInput, SessionError> {
        if self.is_done() {
            return Err(SessionError::Ended(self.id));
        }
        if !v.is_finite() || !omega.is_finite() {
            return Err(SessionError::Invalid("control must be finite".into()));
        }
        self.held = clamp_control(ControlInput::new(v, omega), &self.episode.config().evader_bounds);
        Ok(self.held)
    }

    /// Advances one tick with the held control and returns the new frame.
    pub fn tick(&mut self) -> Result<Frame, SessionError> {
        if self.is_done() {
            return Err(SessionError::Ended(self.id));
        }
        self.episode
            .step(Some(self.held))
            .map_err(|e| SessionError::Invalid(e.to_string()))?;
        Ok(self.frame())
    }

    pub fn frame(&self) -> Frame {
        let ep = &self.episode;
        Frame {
            session: self.id,
            tick: ep.tick(),
            t: ep.time(),
            status: ep.status(),
            pursuer: Pose::from(ep.pursuer()),
            evader: Pose::from(ep.evader()),
            detection: ep.detection().is_some(),
            measurement: measurement(ep.detection()),
            belief: Belief::new(ep.belief(), ep.pursuer()),
            fov: (&ep.config().fov).into(),
            reward: ep.current_reward(),
            discounted_return: ep.discounted_return(),
            time_to_capture: ep.time_to_capture(),
            evader_control: self.held.into(),
        }
    }

    pub fn end_message(&self) -> ServerMessage {
        ServerMessage::End {
            session: self.id,
            status: self.episode.status(),
            time_to_capture: self.episode.time_to_capture(),
            discounted_return: self.episode.discounted_return(),
            ticks: self.episode.trajectory().len(),
        }
    }

    pub fn into_result(self) -> EpisodeResult {
        self.episode.into_result()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pursuit_core::dynamics::AgentState;
    use pursuit_core::episode::EpisodeStatus;

    fn session(evader: AgentState) -> Session {
        let cfg = EpisodeConfig {
            initial_evader: Some(evader),
            ..EpisodeConfig::default()
        };
        Session::new(1, &PursuerPolicySpec::reactive(), &cfg, None).unwrap()
    }

    #[test]
    fn controls_are_clamped_to_evader_bounds() {
        let mut s = session(AgentState::new(5.0, 0.0, 0.0));
        assert_eq!(s.submit(9.0, 0.0).unwrap(), ControlInput::new(2.5, 0.0));
        assert_eq!(s.submit(-1.0, -7.0).unwrap(), ControlInput::new(0.0, -2.0));
    }

    #[test]
    fn held_control_persists_across_ticks() {
        let mut s = session(AgentState::new(5.0, 0.0, 0.0));
        s.submit(1.0, 0.5).unwrap();
        let a = s.tick().unwrap();
        let b = s.tick().unwrap();
        assert_eq!(a.evader_control, b.evader_control);
        let moved = (b.evader.x - a.evader.x).hypot(b.evader.y - a.evader.y);
        assert!((moved - 0.2).abs() < 1e-12);
    }

    #[test]
    fn submit_after_capture_is_rejected() {
        let mut s = session(AgentState::new(1.0, 0.0, 0.0));
        let mut last = s.frame();
        while !s.is_done() {
            last = s.tick().unwrap();
        }
        assert_eq!(last.status, EpisodeStatus::Captured);
        assert!(last.time_to_capture.is_some());
        assert!(matches!(s.submit(1.0, 0.0), Err(SessionError::Ended(1))));
        assert!(matches!(s.tick(), Err(SessionError::Ended(1))));
    }

    #[test]
    fn hidden_evader_grows_belief_trace() {
        // directly astern and far: the reactive pursuer rotates in place, the
        // evader drives away along the pursuer's blind side
        let mut s = session(AgentState::new(-9.0, 0.0, std::f64::consts::PI));
        s.submit(2.5, 0.0).unwrap();
        let mut prev = s.frame();
        let mut hidden_ticks = 0;
        for _ in 0..5 {
            let f = s.tick().unwrap();
            if !f.detection && !prev.detection {
                assert!((f.belief.cov_trace - prev.belief.cov_trace - 0.03).abs() < 1e-12);
                hidden_ticks += 1;
            }
            prev = f;
        }
        assert!(hidden_ticks > 0);
    }
}
