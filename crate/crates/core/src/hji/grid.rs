use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular grid over `(px_rel, py_rel, θ_rel)`.
///
/// Position axes include both end points. The heading axis is periodic with
/// nodes at `−π + k·2π/n_theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub n_theta: usize,
}

impl Default for Grid3D {
    /// `[-8, 8]²` m at 81×81 nodes, 41 headings.
    fn default() -> Self {
        Self::square(8.0, 81, 41)
    }
}

impl Grid3D {
    /// Symmetric square domain `[-half_width, half_width]²`.
    pub fn square(half_width: f64, n: usize, n_theta: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: n,
            ny: n,
            n_theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 3 || n % 2 == 0 {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be odd and at least 3")));
            }
        }
        if self.n_theta < 3 {
            return Err(Error::InvalidGrid(format!("n_theta = {} must be at least 3", self.n_theta)));
        }
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidGrid("position bounds must be finite and increasing".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy()
    }

    pub fn theta(&self, it: usize) -> f64 {
        -PI + it as f64 * self.dtheta()
    }

    /// Flat index, heading fastest, then y, then x.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (ix * self.ny + iy) * self.n_theta + it
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let it = idx % self.n_theta;
        let rest = idx / self.n_theta;
        (rest / self.ny, rest % self.ny, it)
    }

    pub fn contains_position(&self, px: f64, py: f64) -> bool {
        const SLACK: f64 = 1e-9;
        px >= self.x_min - SLACK && px <= self.x_max + SLACK && py >= self.y_min - SLACK && py <= self.y_max + SLACK
    }

    /// Closest node, with positions clamped into the domain and heading wrapped.
    pub fn nearest(&self, px: f64, py: f64, theta: f64) -> (usize, usize, usize) {
        let ix = ((px - self.x_min) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = ((py - self.y_min) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        let it = ((theta + PI) / self.dtheta()).round().rem_euclid(self.n_theta as f64) as usize % self.n_theta;
        (ix, iy, it)
    }

    /// Whether a node sits on an x or y boundary face.
    pub fn on_boundary(&self, ix: usize, iy: usize) -> bool {
        ix == 0 || iy == 0 || ix == self.nx - 1 || iy == self.ny - 1
    }
}
