//! First-order Lax-Friedrichs solver for the reachable-tube HJI inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid3D;
use super::terminal_cost_with_radius;
use super::value::ValueFunction;
use super::CAPTURE_RADIUS;
use crate::dynamics::{ControlBounds, RelativeState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Interval between stored value slices, seconds.
    pub slice_dt: f64,
    /// Integration step; `None` picks `cfl_safety` times the stable limit.
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    pub capture_radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            slice_dt: 0.2,
            dt: None,
            cfl_safety: 0.5,
            capture_radius: CAPTURE_RADIUS,
        }
    }
}

/// Per-node dissipation coefficients `α_i(x) = max_u |f_i(x, u)|`.
///
/// `f1` depends on `(py, θ)`, `f2` on `(px, θ)` and `f3` on nothing, so the
/// bounds are tabulated per axis pair. Each `f_i` is affine in every control,
/// so the maximum magnitude is attained at a corner of the control box.
struct Dissipation {
    alpha_x: Vec<f64>, // [iy][it]
    alpha_y: Vec<f64>, // [ix][it]
    alpha_theta: f64,
}

impl Dissipation {
    fn new(grid: &Grid3D, bp: &ControlBounds, be: &ControlBounds) -> Self {
        let nt = grid.n_theta;
        let vp = [bp.v_min, bp.v_max];
        let wp = [bp.omega_min, bp.omega_max];
        let ve = [be.v_min, be.v_max];
        let we = [be.omega_min, be.omega_max];

        let mut alpha_x = vec![0.0; grid.ny * nt];
        for iy in 0..grid.ny {
            for it in 0..nt {
                let (py, c) = (grid.y(iy), grid.theta(it).cos());
                let mut m: f64 = 0.0;
                for &a in &vp {
                    for &b in &ve {
                        for &w in &wp {
                            m = m.max((-a + b * c + w * py).abs());
                        }
                    }
                }
                alpha_x[iy * nt + it] = m;
            }
        }
        let mut alpha_y = vec![0.0; grid.nx * nt];
        for ix in 0..grid.nx {
            for it in 0..nt {
                let (px, s) = (grid.x(ix), grid.theta(it).sin());
                let mut m: f64 = 0.0;
                for &b in &ve {
                    for &w in &wp {
                        m = m.max((b * s - w * px).abs());
                    }
                }
                alpha_y[ix * nt + it] = m;
            }
        }
        let mut alpha_theta: f64 = 0.0;
        for &a in &we {
            for &b in &wp {
                alpha_theta = alpha_theta.max((a - b).abs());
            }
        }
        Self {
            alpha_x,
            alpha_y,
            alpha_theta,
        }
    }
}

/// Largest stable explicit step: `1 / max_x Σ_i α_i(x) / Δ_i`.
pub fn cfl_limit(grid: &Grid3D, bp: &ControlBounds, be: &ControlBounds) -> f64 {
    let d = Dissipation::new(grid, bp, be);
    cfl_from(grid, &d)
}

fn cfl_from(grid: &Grid3D, d: &Dissipation) -> f64 {
    let nt = grid.n_theta;
    let max_x = (0..grid.ny * nt).map(|i| d.alpha_x[i]).fold(0.0, f64::max);
    let max_y = (0..grid.nx * nt).map(|i| d.alpha_y[i]).fold(0.0, f64::max);
    // max over nodes of the sum is bounded by the sum of maxima, which only
    // makes the step more conservative
    let rate = max_x / grid.dx() + max_y / grid.dy() + d.alpha_theta / grid.dtheta();
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// Solves the tube from `V(·, 0) = l` up to time-to-go `horizon`.
pub fn solve_hji(
    grid: &Grid3D,
    bp: &ControlBounds,
    be: &ControlBounds,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<ValueFunction> {
    grid.validate()?;
    if !(opts.slice_dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::ConfigInvalid("horizon and slice interval must be positive".into()));
    }
    let dissipation = Dissipation::new(grid, bp, be);
    let limit = cfl_from(grid, &dissipation);
    let dt = match opts.dt {
        Some(dt) if dt > limit || dt <= 0.0 => return Err(Error::CflViolation { dt, limit }),
        Some(dt) => dt,
        None => opts.cfl_safety * limit,
    };
    let substeps = ((opts.slice_dt / dt).ceil() as usize).max(1);
    let step = opts.slice_dt / substeps as f64;
    let n_slices = (horizon / opts.slice_dt).round() as usize + 1;

    let mut current: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let (ix, iy, it) = grid.unravel(idx);
            let x = RelativeState::new(grid.x(ix), grid.y(iy), grid.theta(it));
            terminal_cost_with_radius(&x, opts.capture_radius)
        })
        .collect();
    let mut next = current.clone();
    let mut values: Vec<f32> = Vec::with_capacity(grid.len() * n_slices);
    values.extend(current.iter().map(|&v| v as f32));

    let trig: Vec<(f64, f64)> = (0..grid.n_theta).map(|it| grid.theta(it).sin_cos()).collect();
    let ctx = StepContext {
        grid,
        bp,
        be,
        dissipation: &dissipation,
        trig: &trig,
        xs: (0..grid.nx).map(|i| grid.x(i)).collect(),
        ys: (0..grid.ny).map(|i| grid.y(i)).collect(),
    };

    for _ in 1..n_slices {
        for _ in 0..substeps {
            ctx.advance(&current, &mut next, step);
            std::mem::swap(&mut current, &mut next);
        }
        values.extend(current.iter().map(|&v| v as f32));
    }

    let value = ValueFunction::from_slices(grid.clone(), opts.slice_dt, values)?;
    check_nested(&value)?;
    Ok(value)
}

fn check_nested(v: &ValueFunction) -> Result<()> {
    for k in 1..v.slices() {
        let (prev, cur) = (v.slice(k - 1), v.slice(k));
        if let Some(node) = cur.iter().zip(prev).position(|(c, p)| c > p) {
            return Err(Error::NonMonotoneTube { slice: k, node });
        }
    }
    Ok(())
}

struct StepContext<'a> {
    grid: &'a Grid3D,
    bp: &'a ControlBounds,
    be: &'a ControlBounds,
    dissipation: &'a Dissipation,
    trig: &'a [(f64, f64)],
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl StepContext<'_> {
    /// One explicit step `V ← V + dt·min(0, Ĥ)`; every x-plane of the output
    /// depends only on the previous field so planes are updated in parallel.
    fn advance(&self, cur: &[f64], out: &mut [f64], dt: f64) {
        let g = self.grid;
        let plane = g.ny * g.n_theta;
        out.par_chunks_mut(plane).enumerate().for_each(|(ix, chunk)| {
            self.advance_plane(cur, chunk, ix, dt);
        });
    }

    #[inline(always)]
    fn advance_plane(&self, cur: &[f64], out: &mut [f64], ix: usize, dt: f64) {
        let g = self.grid;
        let nt = g.n_theta;
        let sx = g.ny * nt;
        let (inv_dx, inv_dy, inv_dt) = (1.0 / g.dx(), 1.0 / g.dy(), 1.0 / g.dtheta());
        let px = self.xs[ix];
        let (bp, be) = (self.bp, self.be);
        let wp_tie = 0.0f64.clamp(bp.omega_min, bp.omega_max);
        let we_tie = 0.0f64.clamp(be.omega_min, be.omega_max);
        let at = self.dissipation.alpha_theta;

        for iy in 0..g.ny {
            let py = self.ys[iy];
            for it in 0..nt {
                let idx = g.index(ix, iy, it);
                let v = cur[idx];

                // one-sided linear extrapolation at the position faces makes
                // both one-sided differences equal there
                let (dxm, dxp) = if ix == 0 {
                    let d = (cur[idx + sx] - v) * inv_dx;
                    (d, d)
                } else if ix == g.nx - 1 {
                    let d = (v - cur[idx - sx]) * inv_dx;
                    (d, d)
                } else {
                    ((v - cur[idx - sx]) * inv_dx, (cur[idx + sx] - v) * inv_dx)
                };
                let (dym, dyp) = if iy == 0 {
                    let d = (cur[idx + nt] - v) * inv_dy;
                    (d, d)
                } else if iy == g.ny - 1 {
                    let d = (v - cur[idx - nt]) * inv_dy;
                    (d, d)
                } else {
                    ((v - cur[idx - nt]) * inv_dy, (cur[idx + nt] - v) * inv_dy)
                };
                let prev_t = if it == 0 { idx + nt - 1 } else { idx - 1 };
                let next_t = if it == nt - 1 { idx + 1 - nt } else { idx + 1 };
                let dtm = (v - cur[prev_t]) * inv_dt;
                let dtp = (cur[next_t] - v) * inv_dt;

                let p1 = 0.5 * (dxm + dxp);
                let p2 = 0.5 * (dym + dyp);
                let p3 = 0.5 * (dtm + dtp);
                let (s, c) = self.trig[it];

                // closed-form saddle of p · f, ties broken as in `hamiltonian`
                let coef_vp = -p1;
                let coef_wp = p1 * py - p2 * px - p3;
                let coef_ve = p1 * c + p2 * s;
                let vp = if coef_vp > 0.0 { bp.v_min } else { bp.v_max };
                let wp = if coef_wp > 0.0 {
                    bp.omega_min
                } else if coef_wp < 0.0 {
                    bp.omega_max
                } else {
                    wp_tie
                };
                let ve = if coef_ve < 0.0 { be.v_min } else { be.v_max };
                let we = if p3 > 0.0 {
                    be.omega_max
                } else if p3 < 0.0 {
                    be.omega_min
                } else {
                    we_tie
                };
                let ham = coef_vp * vp + coef_wp * wp + coef_ve * ve + p3 * we;

                let ax = self.dissipation.alpha_x[iy * nt + it];
                let ay = self.dissipation.alpha_y[ix * nt + it];
                let h_num = ham + 0.5 * (ax * (dxp - dxm) + ay * (dyp - dym) + at * (dtp - dtm));
                out[idx - ix * sx] = v + dt * h_num.min(0.0);
            }
        }
    }
}
