//! Zero-sum pursuit-evasion game on the relative state.
//!
//! The pursuer minimizes and the evader maximizes the running minimum of the
//! signed capture distance. The value of the game is obtained as the viscosity
//! solution of the backward reachable-tube HJI variational inequality
//!
//! ```text
//! ∂V/∂s = min(0, H(x, ∇V)),   V(x, 0) = l(x) = |p| − r_capture,
//! H(x, p) = min_{u_p} max_{u_e} p · f(x, u_p, u_e)
//! ```
//!
//! where `s` is the time-to-go. `V(x, s) ≤ 0` exactly on the set of relative
//! states from which the pursuer can force capture within `s` seconds.

mod grid;
mod hamiltonian;
mod oracle;
mod policy;
mod solver;
mod value;

pub use grid::Grid3D;
pub use hamiltonian::{hamiltonian, Costate, Saddle};
pub use oracle::{corner_controls, discrete_game_oracle, OracleTable};
pub use policy::{decision_time_to_go, optimal_evader_control, optimal_pursuer_control, GameControl};
pub use solver::{cfl_limit, solve_hji, SolverOptions};
pub use value::ValueFunction;

use crate::dynamics::RelativeState;

/// Capture radius, meters.
pub const CAPTURE_RADIUS: f64 = 0.8;

/// Signed distance to the capture disc: non-positive exactly when captured.
pub fn terminal_cost(x: &RelativeState) -> f64 {
    terminal_cost_with_radius(x, CAPTURE_RADIUS)
}

pub fn terminal_cost_with_radius(x: &RelativeState, radius: f64) -> f64 {
    x.px_rel.hypot(x.py_rel) - radius
}
