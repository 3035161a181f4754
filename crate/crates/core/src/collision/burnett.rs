//! Burnett functions ψ_{nlm}(v) = c_{nl} L_n^{(l+1/2)}(|v|²/2) |v|^l Y_{lm}(v̂),
//! orthonormal in L²(M dv) and spanning the polynomials of total degree ≤ D
//! when 2n + l ≤ D.

use crate::gauss::{factorial, gamma_half};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BurnettMode {
    pub n: usize,
    pub l: usize,
    pub m: i32,
}

impl BurnettMode {
    pub fn degree(&self) -> usize {
        2 * self.n + self.l
    }

    /// Collision invariants: 1, v, |v|² live in (n, l) = (0,0), (1,0), (0,1).
    pub fn is_invariant(&self) -> bool {
        matches!((self.n, self.l), (0, 0) | (1, 0) | (0, 1))
    }
}

/// Modes of total degree ≤ `degree`, ordered by l, then m, then n.
pub fn modes(degree: usize) -> Vec<BurnettMode> {
    let mut out = Vec::new();
    for l in 0..=degree {
        for m in -(l as i32)..=(l as i32) {
            for n in 0..=((degree - l) / 2) {
                out.push(BurnettMode { n, l, m });
            }
        }
    }
    out
}

/// Radial normalization c_{nl}.
pub fn radial_norm(n: usize, l: usize) -> f64 {
    let c2 = (2.0 * PI).powf(1.5) * factorial(n) / (2f64.powf(l as f64 + 0.5) * gamma_half(n + l + 1));
    c2.sqrt()
}

/// Values R̃_{nl}(s²) = c_{nl} L_n^{(l+1/2)}(s²/2) for n = 0..=n_max.
pub fn radial_values(n_max: usize, l: usize, s2: f64, out: &mut [f64]) {
    let alpha = l as f64 + 0.5;
    let t = s2 / 2.0;
    let mut lm1 = 0.0;
    let mut lk = 1.0;
    for k in 0..=n_max {
        out[k] = lk * radial_norm(k, l);
        let kf = k as f64;
        let next = if k == 0 { 1.0 + alpha - t } else { ((2.0 * kf + 1.0 + alpha - t) * lk - (kf + alpha) * lm1) / (kf + 1.0) };
        lm1 = lk;
        lk = next;
    }
}

/// Real regular solid harmonics |v|^l Y_{lm}(v̂) for all l ≤ l_max, stored at
/// index l² + l + m.
pub fn solid_harmonics(l_max: usize, v: [f64; 3], out: &mut [f64]) {
    let [x, y, z] = v;
    let r2 = x * x + y * y + z * z;
    // (x + iy)^m
    let mut cm = vec![(1.0f64, 0.0f64); l_max + 1];
    for m in 1..=l_max {
        let (a, b) = cm[m - 1];
        cm[m] = (a * x - b * y, a * y + b * x);
    }
    for m in 0..=l_max {
        // Q_l^m with Q_m^m = (2m-1)!!
        let mut q_prev = 0.0;
        let mut q = (1..=m).map(|k| (2 * k - 1) as f64).product::<f64>();
        for l in m..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let norm = ((2.0 * lf + 1.0) / (4.0 * PI) * factorial(l - m) / factorial(l + m)).sqrt();
            if m == 0 {
                out[l * l + l] = norm * q;
            } else {
                let s = std::f64::consts::SQRT_2 * norm * q;
                out[l * l + l + m] = s * cm[m].0;
                out[l * l + l - m] = s * cm[m].1;
            }
            let q_next = if l == m {
                (2.0 * mf + 1.0) * z * q
            } else {
                ((2.0 * lf + 1.0) * z * q - (lf + mf) * r2 * q_prev) / (lf + 1.0 - mf)
            };
            q_prev = q;
            q = q_next;
        }
    }
}

/// Evaluates every mode of a fixed list at arbitrary velocities.
#[derive(Debug, Clone)]
pub struct BurnettEvaluator {
    modes: Vec<BurnettMode>,
    l_max: usize,
    n_max: usize,
}

impl BurnettEvaluator {
    pub fn new(modes: Vec<BurnettMode>) -> Self {
        let l_max = modes.iter().map(|m| m.l).max().unwrap_or(0);
        let n_max = modes.iter().map(|m| m.n).max().unwrap_or(0);
        Self { modes, l_max, n_max }
    }

    pub fn modes(&self) -> &[BurnettMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eval(&self, v: [f64; 3], out: &mut [f64]) {
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let mut sh = vec![0.0; (self.l_max + 1) * (self.l_max + 1)];
        solid_harmonics(self.l_max, v, &mut sh);
        let mut rad = vec![0.0; (self.l_max + 1) * (self.n_max + 1)];
        for l in 0..=self.l_max {
            radial_values(self.n_max, l, s2, &mut rad[l * (self.n_max + 1)..(l + 1) * (self.n_max + 1)]);
        }
        for (o, md) in out.iter_mut().zip(&self.modes) {
            let li = md.l as i64;
            *o = rad[md.l * (self.n_max + 1) + md.n] * sh[(li * li + li + md.m as i64) as usize];
        }
    }
}
