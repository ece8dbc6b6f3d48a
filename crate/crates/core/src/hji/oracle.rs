//! Tabular backward induction of a discretized capture game.
//!
//! Used only to cross-check the PDE solver on small instances. Each node is
//! advanced for one step under every control pair, the end point is snapped
//! to the nearest node, and capture within `k + 1` steps holds when the
//! pursuer has a control such that every evader reply either passes through
//! the capture disc during the step or lands on a node captured within `k`.

use super::grid::Grid3D;
use super::terminal_cost_with_radius;
use crate::dynamics::{step_relative, ControlBounds, ControlInput, RelativeState};
use crate::error::{Error, Result};

const MAX_NODES: usize = 21 * 21 * 13;
const MAX_PAIRS: usize = 25;
const MAX_STEPS: usize = 30;
const SUBSTEPS: usize = 16;

/// The four bang-bang corners of a control box.
pub fn corner_controls(b: &ControlBounds) -> Vec<ControlInput> {
    vec![
        ControlInput::new(b.v_min, b.omega_min),
        ControlInput::new(b.v_min, b.omega_max),
        ControlInput::new(b.v_max, b.omega_min),
        ControlInput::new(b.v_max, b.omega_max),
    ]
}

/// Capture flags per node for every horizon `0..=steps`.
#[derive(Debug, Clone)]
pub struct OracleTable {
    pub grid: Grid3D,
    pub step_dt: f64,
    captured: Vec<Vec<bool>>,
}

impl OracleTable {
    pub fn steps(&self) -> usize {
        self.captured.len() - 1
    }

    /// Capture flags for a horizon of `k` steps.
    pub fn at(&self, k: usize) -> &[bool] {
        &self.captured[k]
    }

    pub fn final_table(&self) -> &[bool] {
        self.captured.last().expect("at least the base case")
    }
}

pub fn discrete_game_oracle(
    grid: &Grid3D,
    pursuer_controls: &[ControlInput],
    evader_controls: &[ControlInput],
    steps: usize,
    step_dt: f64,
    capture_radius: f64,
) -> Result<OracleTable> {
    grid.validate()?;
    let pairs = pursuer_controls.len() * evader_controls.len();
    if grid.len() > MAX_NODES || pairs > MAX_PAIRS || steps > MAX_STEPS {
        return Err(Error::InstanceTooLarge(format!(
            "{} nodes, {pairs} control pairs, {steps} steps (limits {MAX_NODES}, {MAX_PAIRS}, {MAX_STEPS})",
            grid.len()
        )));
    }
    if pairs == 0 {
        return Err(Error::ConfigInvalid("oracle needs at least one control per agent".into()));
    }

    let node_state = |idx: usize| {
        let (ix, iy, it) = grid.unravel(idx);
        RelativeState::new(grid.x(ix), grid.y(iy), grid.theta(it))
    };

    // transition table: (hit during step, successor node)
    let ne = evader_controls.len();
    let np = pursuer_controls.len();
    let mut transitions = Vec::with_capacity(grid.len() * pairs);
    let h = step_dt / SUBSTEPS as f64;
    for idx in 0..grid.len() {
        let start = node_state(idx);
        for up in pursuer_controls {
            for ue in evader_controls {
                let mut x = start;
                let mut hit = terminal_cost_with_radius(&x, capture_radius) <= 0.0;
                for _ in 0..SUBSTEPS {
                    x = step_relative(&x, up, ue, h);
                    hit |= terminal_cost_with_radius(&x, capture_radius) <= 0.0;
                }
                let (ix, iy, it) = grid.nearest(x.px_rel, x.py_rel, x.theta_rel);
                transitions.push((hit, grid.index(ix, iy, it)));
            }
        }
    }

    let base: Vec<bool> = (0..grid.len())
        .map(|idx| terminal_cost_with_radius(&node_state(idx), capture_radius) <= 0.0)
        .collect();
    let mut captured = vec![base];
    for _ in 0..steps {
        let prev = captured.last().expect("base case present");
        let next: Vec<bool> = (0..grid.len())
            .map(|idx| {
                prev[idx]
                    || (0..np).any(|i| {
                        (0..ne).all(|j| {
                            let (hit, succ) = transitions[(idx * np + i) * ne + j];
                            hit || prev[succ]
                        })
                    })
            })
            .collect();
        captured.push(next);
    }
    Ok(OracleTable {
        grid: grid.clone(),
        step_dt,
        captured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid3D {
        Grid3D::square(5.0, 21, 13)
    }

    fn run(bp: &ControlBounds, steps: usize) -> OracleTable {
        discrete_game_oracle(
            &grid(),
            &corner_controls(bp),
            &corner_controls(&ControlBounds::EVADER),
            steps,
            0.3,
            0.8,
        )
        .unwrap()
    }

    #[test]
    fn horizon_zero_is_capture_disc() {
        let t = run(&ControlBounds::PURSUER, 0);
        let g = grid();
        for idx in 0..g.len() {
            let (ix, iy, _) = g.unravel(idx);
            assert_eq!(t.at(0)[idx], g.x(ix).hypot(g.y(iy)) <= 0.8);
        }
    }

    #[test]
    fn capture_sets_are_nested() {
        let t = run(&ControlBounds::PURSUER, 10);
        for k in 0..t.steps() {
            assert!(t.at(k).iter().zip(t.at(k + 1)).all(|(a, b)| !a || *b));
        }
        let count = |k: usize| t.at(k).iter().filter(|&&c| c).count();
        assert!(count(10) > count(0));
    }

    #[test]
    fn equal_speeds_cannot_catch_a_fleeing_evader() {
        let equal = ControlBounds {
            v_max: ControlBounds::EVADER.v_max,
            ..ControlBounds::PURSUER
        };
        let t = run(&equal, 10);
        let g = grid();
        // evader dead ahead, facing away, beyond the capture radius
        for ix in 0..g.nx {
            let x = g.x(ix);
            if x > 0.8 + g.dx() {
                let (_, iy, it) = g.nearest(x, 0.0, 0.0);
                assert!(!t.final_table()[g.index(ix, iy, it)], "captured from x = {x}");
            }
        }
    }

    #[test]
    fn oversized_instances_are_refused() {
        let big = Grid3D::square(5.0, 23, 13);
        let c = corner_controls(&ControlBounds::PURSUER);
        assert!(matches!(
            discrete_game_oracle(&big, &c, &c, 5, 0.3, 0.8),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            discrete_game_oracle(&grid(), &c, &c, 31, 0.3, 0.8),
            Err(Error::InstanceTooLarge(_))
        ));
    }
}
