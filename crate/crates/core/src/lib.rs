//! Pursuit-evasion between two planar unicycles.
//!
//! The crate bundles everything needed to simulate and evaluate a pursuer
//! chasing an evader on an open plane:
//!
//! - [`dynamics`]: unicycle kinematics and ego-centric frame transforms.
//! - [`evader`]: the evader behavior zoo (Dubins weaving, random motion
//!   primitives, game-optimal, noisy game-optimal, straight line).
//! - [`perception`]: limited field-of-view sensing and the relative-state
//!   Kalman filter.
//! - [`hji`]: a grid solver for the zero-sum Hamilton-Jacobi-Isaacs game and
//!   the bang-bang policies derived from its value function.
//! - [`pursuer`]: reactive, lookahead, game-optimal and search-and-track
//!   pursuers.
//! - [`episode`]: the deterministic episode engine.
//! - [`harness`]: seeded sweeps, cross evaluation and export.

pub mod config;
pub mod dynamics;
pub mod episode;
pub mod error;
pub mod evader;
pub mod harness;
pub mod hji;
pub mod perception;
pub mod pursuer;
pub mod rng;

pub use dynamics::{AgentState, ControlBounds, ControlInput, RelativeState};
pub use error::{Error, Result};
