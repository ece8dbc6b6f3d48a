use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::grid::Grid3D;
use super::hamiltonian::Costate;
use crate::dynamics::RelativeState;
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"HJIV1";

/// Game value sampled on a [`Grid3D`] at evenly spaced times-to-go.
///
/// Slice `k` holds `V(·, k·slice_dt)`; slice 0 is the terminal cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    grid: Grid3D,
    slice_dt: f64,
    values: Vec<f32>,
}

impl ValueFunction {
    pub fn from_slices(grid: Grid3D, slice_dt: f64, values: Vec<f32>) -> Result<Self> {
        grid.validate()?;
        let nodes = grid.len();
        if values.is_empty() || !values.len().is_multiple_of(nodes) {
            return Err(Error::BadValueFile(format!(
                "{} values do not tile {} grid nodes",
                values.len(),
                nodes
            )));
        }
        if !(slice_dt > 0.0 && slice_dt.is_finite()) {
            return Err(Error::BadValueFile(format!("slice interval {slice_dt} must be positive")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadValueFile("non-finite value".into()));
        }
        Ok(Self { grid, slice_dt, values })
    }

    /// Samples `f(px, py, θ, s)` at every node and stored time.
    pub fn from_fn(grid: Grid3D, slice_dt: f64, slices: usize, f: impl Fn(f64, f64, f64, f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.len() * slices);
        for k in 0..slices {
            let s = k as f64 * slice_dt;
            for ix in 0..grid.nx {
                for iy in 0..grid.ny {
                    for it in 0..grid.n_theta {
                        values.push(f(grid.x(ix), grid.y(iy), grid.theta(it), s) as f32);
                    }
                }
            }
        }
        Self::from_slices(grid, slice_dt, values)
    }

    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn slice_dt(&self) -> f64 {
        self.slice_dt
    }

    pub fn slices(&self) -> usize {
        self.values.len() / self.grid.len()
    }

    pub fn horizon(&self) -> f64 {
        (self.slices() - 1) as f64 * self.slice_dt
    }

    pub fn slice(&self, k: usize) -> &[f32] {
        let n = self.grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn node(&self, k: usize, ix: usize, iy: usize, it: usize) -> f32 {
        self.values[k * self.grid.len() + self.grid.index(ix, iy, it)]
    }

    /// Stored slice nearest to time-to-go `s`, clamped to the horizon.
    pub fn slice_index(&self, s: f64) -> usize {
        let k = (s.max(0.0) / self.slice_dt).round();
        (k as usize).min(self.slices() - 1)
    }

    pub fn contains(&self, x: &RelativeState) -> bool {
        self.grid.contains_position(x.px_rel, x.py_rel)
    }

    /// Moves a query onto the nearest point of the position domain.
    pub fn clamp_to_grid(&self, x: &RelativeState) -> RelativeState {
        RelativeState {
            px_rel: x.px_rel.clamp(self.grid.x_min, self.grid.x_max),
            py_rel: x.py_rel.clamp(self.grid.y_min, self.grid.y_max),
            theta_rel: x.theta_rel,
        }
    }

    fn check(&self, x: &RelativeState) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::QueryOutsideGrid {
                px: x.px_rel,
                py: x.py_rel,
            })
        }
    }

    /// Trilinear interpolation in slice `k`; positions are clamped.
    fn interpolate(&self, k: usize, px: f64, py: f64, theta: f64) -> f64 {
        let g = &self.grid;
        let (ix, fx) = locate(px, g.x_min, g.dx(), g.nx);
        let (iy, fy) = locate(py, g.y_min, g.dy(), g.ny);
        let ut = (theta + PI) / g.dtheta();
        let base = ut.floor();
        let ft = ut - base;
        let it0 = (base as i64).rem_euclid(g.n_theta as i64) as usize;
        let it1 = (it0 + 1) % g.n_theta;

        let slice = self.slice(k);
        let at = |i: usize, j: usize, t: usize| slice[g.index(i, j, t)] as f64;
        let lerp = |a: f64, b: f64, w: f64| a + (b - a) * w;
        let along_theta = |i: usize, j: usize| lerp(at(i, j, it0), at(i, j, it1), ft);
        let lo = lerp(along_theta(ix, iy), along_theta(ix, iy + 1), fy);
        let hi = lerp(along_theta(ix + 1, iy), along_theta(ix + 1, iy + 1), fy);
        lerp(lo, hi, fx)
    }

    /// Interpolated value at the stored slice nearest to `s`.
    pub fn value(&self, x: &RelativeState, s: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.interpolate(self.slice_index(s), x.px_rel, x.py_rel, x.theta_rel))
    }

    /// Interpolated value and central-difference gradient of the interpolant.
    /// Differences use one grid spacing per axis, one-sided at position
    /// boundaries and periodic in heading.
    pub fn value_and_gradient(&self, x: &RelativeState, s: f64) -> Result<(f64, Costate)> {
        self.check(x)?;
        let k = self.slice_index(s);
        let g = &self.grid;
        let px = x.px_rel.clamp(g.x_min, g.x_max);
        let py = x.py_rel.clamp(g.y_min, g.y_max);
        let th = x.theta_rel;
        let value = self.interpolate(k, px, py, th);

        let axis = |lo: f64, hi: f64, at: f64, h: f64, f: &dyn Fn(f64) -> f64| {
            let a = (at - h).max(lo);
            let b = (at + h).min(hi);
            (f(b) - f(a)) / (b - a)
        };
        let p1 = axis(g.x_min, g.x_max, px, g.dx(), &|u| self.interpolate(k, u, py, th));
        let p2 = axis(g.y_min, g.y_max, py, g.dy(), &|u| self.interpolate(k, px, u, th));
        let h = g.dtheta();
        let p3 = (self.interpolate(k, px, py, th + h) - self.interpolate(k, px, py, th - h)) / (2.0 * h);
        Ok((value, Costate::new(p1, p2, p3)))
    }

    /// Writes the `HJIV1` little-endian format: magic, `nx ny nθ` as u32,
    /// `x_min x_max y_min y_max` as f64, slice count u32, slice interval f64,
    /// then every slice's f32 values with x outermost and heading innermost.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.grid;
        w.write_all(MAGIC)?;
        for n in [g.nx, g.ny, g.n_theta] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for b in [g.x_min, g.x_max, g.y_min, g.y_max] {
            w.write_all(&b.to_le_bytes())?;
        }
        w.write_all(&(self.slices() as u32).to_le_bytes())?;
        w.write_all(&self.slice_dt.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |e: std::io::Error| Error::BadValueFile(e.to_string());
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(bad)?;
        if &magic != MAGIC {
            return Err(Error::BadValueFile("missing HJIV1 magic".into()));
        }
        let mut u32_buf = [0u8; 4];
        let mut f64_buf = [0u8; 8];
        let mut read_u32 = |r: &mut R| -> Result<usize> {
            r.read_exact(&mut u32_buf).map_err(bad)?;
            Ok(u32::from_le_bytes(u32_buf) as usize)
        };
        let (nx, ny, n_theta) = (read_u32(&mut r)?, read_u32(&mut r)?, read_u32(&mut r)?);
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut f64_buf).map_err(bad)?;
            Ok(f64::from_le_bytes(f64_buf))
        };
        let bounds = [read_f64(&mut r)?, read_f64(&mut r)?, read_f64(&mut r)?, read_f64(&mut r)?];
        let grid = Grid3D {
            x_min: bounds[0],
            x_max: bounds[1],
            y_min: bounds[2],
            y_max: bounds[3],
            nx,
            ny,
            n_theta,
        };
        grid.validate().map_err(|e| Error::BadValueFile(e.to_string()))?;
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf).map_err(bad)?;
        let slices = u32::from_le_bytes(buf) as usize;
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf).map_err(bad)?;
        let slice_dt = f64::from_le_bytes(buf);

        let count = grid
            .len()
            .checked_mul(slices)
            .ok_or_else(|| Error::BadValueFile("value count overflows".into()))?;
        let mut raw = vec![0u8; count * 4];
        r.read_exact(&mut raw).map_err(bad)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(bad)? != 0 {
            return Err(Error::BadValueFile("trailing bytes after value array".into()));
        }
        Self::from_slices(grid, slice_dt, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

/// Cell index and fractional offset along a clamped position axis.
fn locate(u: f64, min: f64, step: f64, n: usize) -> (usize, f64) {
    let t = ((u - min) / step).clamp(0.0, (n - 1) as f64);
    let i = (t.floor() as usize).min(n - 2);
    (i, t - i as f64)
}
