//! Limited field-of-view sensing and the relative-state Kalman filter.
//!
//! The filter tracks the evader's pose in the pursuer's body frame with a
//! single-integrator transition model driven only by the pursuer's own
//! command; the evader's motion is treated as process noise. Headings in the
//! innovation are wrapped, everything else is the linear textbook filter.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{to_relative, wrap_angle, AgentState, ControlInput, RelativeState, DEFAULT_DT};
use crate::error::{Error, Result};

/// Serde adapter storing a 3×3 matrix as three rows.
pub mod mat3_rows {
    use nalgebra::Matrix3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix3<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix3<f64>, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Ok(Matrix3::from_fn(|i, j| rows[i][j]))
    }
}

/// Camera-like detection cone in the pursuer's body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FovModel {
    /// Half of the horizontal opening angle, radians.
    pub half_angle: f64,
    pub max_range: f64,
    /// Covariance of the additive Gaussian detection noise.
    #[serde(with = "mat3_rows")]
    pub noise_cov: Matrix3<f64>,
}

impl Default for FovModel {
    fn default() -> Self {
        Self {
            half_angle: 55f64.to_radians(),
            max_range: 10.0,
            noise_cov: Matrix3::from_diagonal(&Vector3::new(0.2, 0.2, 0.1)),
        }
    }
}

impl FovModel {
    pub fn noiseless(mut self) -> Self {
        self.noise_cov = Matrix3::zeros();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_angle > 0.0 && self.half_angle <= std::f64::consts::PI) {
            return Err(Error::ConfigInvalid(format!("FOV half angle {} not in (0, π]", self.half_angle)));
        }
        if self.max_range <= 0.0 || !self.max_range.is_finite() {
            return Err(Error::ConfigInvalid(format!("FOV range {} must be positive", self.max_range)));
        }
        if !is_psd(&self.noise_cov) {
            return Err(Error::ConfigInvalid("detection noise covariance must be symmetric PSD".into()));
        }
        Ok(())
    }

    pub fn contains(&self, rel: &RelativeState) -> bool {
        rel.bearing().abs() <= self.half_angle && rel.range() <= self.max_range
    }
}

/// A noisy measurement of the evader's relative pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub measurement: RelativeState,
}

/// Filter matrices. Defaults: `Q = 0.01·I`, `R = diag(0.2, 0.2, 0.1)`,
/// `P₀ = I`, `A = H = I`, `B = diag(−dt, −dt, dt)` with `dt = 0.2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterParams {
    #[serde(with = "mat3_rows")]
    pub q: Matrix3<f64>,
    #[serde(with = "mat3_rows")]
    pub r: Matrix3<f64>,
    #[serde(with = "mat3_rows")]
    pub p0: Matrix3<f64>,
    #[serde(with = "mat3_rows")]
    pub a: Matrix3<f64>,
    #[serde(with = "mat3_rows")]
    pub b: Matrix3<f64>,
    #[serde(with = "mat3_rows")]
    pub h: Matrix3<f64>,
    pub dt: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self::with_dt(DEFAULT_DT)
    }
}

impl FilterParams {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            q: Matrix3::identity() * 0.01,
            r: Matrix3::from_diagonal(&Vector3::new(0.2, 0.2, 0.1)),
            p0: Matrix3::identity(),
            a: Matrix3::identity(),
            b: Matrix3::from_diagonal(&Vector3::new(-dt, -dt, dt)),
            h: Matrix3::identity(),
            dt,
        }
    }
}

/// Relative-state belief: mean and error covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KalmanState {
    pub mean: RelativeState,
    #[serde(with = "mat3_rows")]
    pub cov: Matrix3<f64>,
}

impl KalmanState {
    /// Belief before any detection: zero mean, covariance `P₀`.
    pub fn initial(params: &FilterParams) -> Self {
        Self {
            mean: RelativeState::default(),
            cov: params.p0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.cov.trace()
    }
}

fn mean_vector(x: &RelativeState) -> Vector3<f64> {
    Vector3::new(x.px_rel, x.py_rel, x.theta_rel)
}

fn mean_state(v: &Vector3<f64>) -> RelativeState {
    RelativeState::new(v[0], v[1], v[2])
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

fn is_psd(m: &Matrix3<f64>) -> bool {
    let asym = (m - m.transpose()).abs().max();
    asym <= 1e-12 && SymmetricEigen::new(*m).eigenvalues.iter().all(|&l| l >= -1e-12)
}

/// Symmetric square root `S` with `S·Sᵀ = M` for a PSD `M`.
fn psd_sqrt(m: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * Matrix3::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Noisy relative pose of the evader if it lies inside the cone, else `None`.
pub fn sense<R: Rng + ?Sized>(
    pursuer: &AgentState,
    evader: &AgentState,
    fov: &FovModel,
    rng: &mut R,
) -> Option<Detection> {
    let truth = to_relative(pursuer, evader);
    if !fov.contains(&truth) {
        return None;
    }
    let white = Vector3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    let noise = psd_sqrt(&fov.noise_cov) * white;
    Some(Detection {
        measurement: mean_state(&(mean_vector(&truth) + noise)),
    })
}

pub fn kf_predict(k: &KalmanState, u: &[f64; 3], p: &FilterParams) -> KalmanState {
    let mean = p.a * mean_vector(&k.mean) + p.b * Vector3::from(*u);
    KalmanState {
        mean: mean_state(&mean),
        cov: symmetrize(&(p.a * k.cov * p.a.transpose() + p.q)),
    }
}

pub fn kf_update(k: &KalmanState, y: &Detection, p: &FilterParams) -> Result<KalmanState> {
    let predicted = p.h * mean_vector(&k.mean);
    let mut innovation = mean_vector(&y.measurement) - predicted;
    innovation[2] = wrap_angle(innovation[2]);

    let s = p.h * k.cov * p.h.transpose() + p.r;
    if s.determinant().abs() < 1e-14 * s.norm().powi(3).max(f64::MIN_POSITIVE) {
        return Err(Error::SingularInnovation);
    }
    let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
    let gain = k.cov * p.h.transpose() * s_inv;

    let mean = mean_vector(&k.mean) + gain * innovation;
    let cov = (Matrix3::identity() - gain * p.h) * k.cov;
    Ok(KalmanState {
        mean: mean_state(&mean),
        cov: symmetrize(&cov),
    })
}

/// One perception tick: predict with the previous pursuer command (skipped
/// on the very first tick), then sense and update on a detection.
#[allow(clippy::too_many_arguments)]
pub fn belief_step<R: Rng + ?Sized>(
    k: &KalmanState,
    pursuer: &AgentState,
    evader: &AgentState,
    prev_control: Option<&ControlInput>,
    fov: &FovModel,
    params: &FilterParams,
    rng: &mut R,
) -> Result<(KalmanState, Option<Detection>)> {
    let predicted = match prev_control {
        Some(u) => kf_predict(k, &u.as_filter_input(), params),
        None => k.clone(),
    };
    let detection = sense(pursuer, evader, fov, rng);
    let belief = match &detection {
        Some(y) => kf_update(&predicted, y, params)?,
        None => predicted,
    };
    Ok((belief, detection))
}
