use super::hamiltonian::hamiltonian;
use super::value::ValueFunction;
use crate::dynamics::{ControlBounds, ControlInput, RelativeState};
use crate::error::Result;

/// A game-optimal control plus how the query was served.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameControl {
    pub control: ControlInput,
    /// The state was outside the grid and was clamped onto its boundary.
    pub clamped: bool,
    /// Time-to-go whose slice supplied the gradient.
    pub time_to_go: f64,
}

/// Time-to-go at which the gradient should be read.
///
/// Inside the tube the value flattens out to `−r_capture` wherever the
/// pursuer can drive the distance to zero, so the gradient at the nominal
/// time-to-go carries no information there. Reading the earliest slice whose
/// tube already contains `x` (the time-to-reach) puts the query on that
/// slice's zero level set instead. Outside the tube the nominal slice is used.
pub fn decision_time_to_go(v: &ValueFunction, x: &RelativeState, s: f64) -> Result<f64> {
    let last = v.slice_index(s);
    if v.value(x, s)? > 0.0 {
        return Ok(last as f64 * v.slice_dt());
    }
    let reach = (0..=last)
        .find(|&k| v.value(x, k as f64 * v.slice_dt()).map(|val| val <= 0.0).unwrap_or(false))
        .unwrap_or(last);
    Ok(reach as f64 * v.slice_dt())
}

/// Pursuer argmin of `∇V(x, s) · f` for `x` in the pursuer's frame.
pub fn optimal_pursuer_control(
    v: &ValueFunction,
    x: &RelativeState,
    s: f64,
    bp: &ControlBounds,
    be: &ControlBounds,
) -> Result<ControlInput> {
    let (_, p) = v.value_and_gradient(x, s)?;
    Ok(hamiltonian(x, &p, bp, be).pursuer)
}

/// Evader argmax of `∇V(x, s) · f` for `x` in the pursuer's frame.
pub fn optimal_evader_control(
    v: &ValueFunction,
    x: &RelativeState,
    s: f64,
    bp: &ControlBounds,
    be: &ControlBounds,
) -> Result<ControlInput> {
    let (_, p) = v.value_and_gradient(x, s)?;
    Ok(hamiltonian(x, &p, bp, be).evader)
}
