use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A periodic box [0, L₁) × … × [0, L_d) with n points per axis, stored
/// row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    d: usize,
    n: usize,
    lengths: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(d: usize, n: usize, lengths: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidInput(format!("spatial dimension {d} not in 1..=3")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!("points per axis must be even and ≥ 2, got {n}")));
        }
        if lengths.len() != d || lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidInput("one positive length per axis is required".into()));
        }
        Ok(Self { d, n, lengths })
    }

    /// The 2π-periodic cube.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        Self::new(d, n, vec![2.0 * PI; d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.d).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// Integer frequency of index j along an axis, in (−n/2, n/2].
    pub fn frequency(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Wavenumber used by derivatives; zero at the Nyquist index.
    pub fn wavenumber(&self, axis: usize, j: usize) -> f64 {
        if self.is_nyquist(j) {
            0.0
        } else {
            2.0 * PI / self.lengths[axis] * self.frequency(j) as f64
        }
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.d).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Wave vector of a flat spectral index (zero beyond d).
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let j = self.unflatten(idx);
        let mut k = [0.0; 3];
        for a in 0..self.d {
            k[a] = self.wavenumber(a, j[a]);
        }
        k
    }

    /// Coordinates of a flat index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let j = self.unflatten(idx);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = j[a] as f64 * self.spacing(a);
        }
        x
    }

    /// Samples f at every grid point.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    /// 2/3-rule mask: true for modes kept by the dealiasing filter.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = self.n as i64 / 3;
        (0..self.len())
            .map(|i| {
                let j = self.unflatten(i);
                (0..self.d).all(|a| !self.is_nyquist(j[a]) && self.frequency(j[a]).abs() <= cut)
            })
            .collect()
    }
}
