use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlBounds, ControlInput, RelativeState};

/// Gradient of the value with respect to `(px_rel, py_rel, θ_rel)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Costate {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl Costate {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Self { p1, p2, p3 }
    }

    pub fn is_finite(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite() && self.p3.is_finite()
    }
}

/// Saddle value of `p · f` together with both optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle {
    pub value: f64,
    pub pursuer: ControlInput,
    pub evader: ControlInput,
}

#[inline]
fn zero_in(lo: f64, hi: f64) -> f64 {
    0.0f64.clamp(lo, hi)
}

/// Minimizer of `coef · u` over `[lo, hi]`; ties go to `tie`.
#[inline]
fn argmin_linear(coef: f64, lo: f64, hi: f64, tie: f64) -> f64 {
    if coef > 0.0 {
        lo
    } else if coef < 0.0 {
        hi
    } else {
        tie
    }
}

#[inline]
fn argmax_linear(coef: f64, lo: f64, hi: f64, tie: f64) -> f64 {
    argmin_linear(-coef, lo, hi, tie)
}

/// `min_{u_p} max_{u_e} p · f(x, u_p, u_e)` in closed form.
///
/// Expanding the relative dynamics,
///
/// ```text
/// p · f = −p1·v_p + (p1·py − p2·px − p3)·ω_p + (p1·cos θ + p2·sin θ)·v_e + p3·ω_e
/// ```
///
/// so every control multiplies its own coefficient and the optimum sits at a
/// bound chosen by that coefficient's sign. Min-max and max-min coincide.
/// Zero coefficients break ties to full speed and zero turn rate.
pub fn hamiltonian(x: &RelativeState, p: &Costate, bp: &ControlBounds, be: &ControlBounds) -> Saddle {
    let (s, c) = x.theta_rel.sin_cos();
    let coef_vp = -p.p1;
    let coef_wp = p.p1 * x.py_rel - p.p2 * x.px_rel - p.p3;
    let coef_ve = p.p1 * c + p.p2 * s;
    let coef_we = p.p3;

    let vp = argmin_linear(coef_vp, bp.v_min, bp.v_max, bp.v_max);
    let wp = argmin_linear(coef_wp, bp.omega_min, bp.omega_max, zero_in(bp.omega_min, bp.omega_max));
    let ve = argmax_linear(coef_ve, be.v_min, be.v_max, be.v_max);
    let we = argmax_linear(coef_we, be.omega_min, be.omega_max, zero_in(be.omega_min, be.omega_max));

    Saddle {
        value: coef_vp * vp + coef_wp * wp + coef_ve * ve + coef_we * we,
        pursuer: ControlInput::new(vp, wp),
        evader: ControlInput::new(ve, we),
    }
}
