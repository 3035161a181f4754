use crate::error::{Error, Result};
use crate::velocity_space::{VelocityFunction, VelocityQuadrature};
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Coefficients of Pg = a + b·v + c|v|² at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroPoint {
    pub a: f64,
    pub b: [f64; 3],
    pub c: f64,
}

impl MacroPoint {
    /// From the moments ⟨g,1⟩, ⟨g,v⟩, ⟨g,|v|²⟩ of the Gaussian weight.
    pub fn from_moments(m0: f64, m1: [f64; 3], m2: f64) -> Self {
        Self { a: 0.5 * (5.0 * m0 - m2), b: m1, c: (m2 - 3.0 * m0) / 6.0 }
    }

    /// ρ + u·v + θ(|v|²/2 − 3/2) written as a + b·v + c|v|².
    pub fn from_fluid(rho: f64, u: [f64; 3], theta: f64) -> Self {
        Self { a: rho - 1.5 * theta, b: u, c: 0.5 * theta }
    }

    /// ρ = ⟨Pg, 1⟩ = a + 3c.
    pub fn rho(&self) -> f64 {
        self.a + 3.0 * self.c
    }

    pub fn u(&self) -> [f64; 3] {
        self.b
    }

    /// θ = ⟨Pg, |v|²/3 − 1⟩ = 2c.
    pub fn theta(&self) -> f64 {
        2.0 * self.c
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        self.a + self.b[0] * v[0] + self.b[1] * v[1] + self.b[2] * v[2] + self.c * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    }
}

/// Batched P on rows of nodal vectors.
#[derive(Debug, Clone)]
pub struct Projector {
    weighted: Array2<f64>,
    poly: Array2<f64>,
}

impl Projector {
    pub fn new(quad: &VelocityQuadrature) -> Self {
        let nv = quad.len();
        let mut weighted = Array2::zeros((nv, 5));
        let mut poly = Array2::zeros((5, nv));
        for (j, (v, w)) in quad.nodes().iter().zip(quad.weights()).enumerate() {
            let row = [1.0, v[0], v[1], v[2], v[0] * v[0] + v[1] * v[1] + v[2] * v[2]];
            for k in 0..5 {
                weighted[[j, k]] = w * row[k];
                poly[[k, j]] = row[k];
            }
        }
        Self { weighted, poly }
    }

    /// Moments ⟨g,1⟩, ⟨g,v_i⟩, ⟨g,|v|²⟩ of every row.
    pub fn moments(&self, g: ArrayView2<f64>) -> Array2<f64> {
        g.dot(&self.weighted)
    }

    /// (a, b₁, b₂, b₃, c) of every row.
    pub fn coefficients(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let m = self.moments(g);
        let mut out = Array2::zeros((g.nrows(), 5));
        for (mut o, r) in out.outer_iter_mut().zip(m.outer_iter()) {
            let p = MacroPoint::from_moments(r[0], [r[1], r[2], r[3]], r[4]);
            o[0] = p.a;
            o[1] = p.b[0];
            o[2] = p.b[1];
            o[3] = p.b[2];
            o[4] = p.c;
        }
        out
    }

    /// Nodal rows of a + b·v + c|v|².
    pub fn synthesize(&self, coef: ArrayView2<f64>) -> Array2<f64> {
        coef.dot(&self.poly)
    }

    pub fn project(&self, g: ArrayView2<f64>) -> Array2<f64> {
        self.synthesize(self.coefficients(g).view())
    }

    pub fn micro(&self, g: ArrayView2<f64>) -> Array2<f64> {
        &g - &self.project(g)
    }
}

/// (a, b, c) and Pg for one velocity function.
pub fn project_p(quad: &VelocityQuadrature, g: &VelocityFunction) -> Result<(MacroPoint, VelocityFunction)> {
    g.check(quad)?;
    let mut m = [0.0; 5];
    for (k, (v, w)) in quad.nodes().iter().zip(quad.weights()).enumerate() {
        let x = w * g.values[k];
        m[0] += x;
        m[1] += x * v[0];
        m[2] += x * v[1];
        m[3] += x * v[2];
        m[4] += x * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    let p = MacroPoint::from_moments(m[0], [m[1], m[2], m[3]], m[4]);
    Ok((p, VelocityFunction::from_fn(quad, |v| p.eval(v))))
}

/// ⟨g, v⊗v⟩ and ⟨g, |v|² v⟩ for a micro function g.
pub fn micro_flux(quad: &VelocityQuadrature, g: &VelocityFunction) -> Result<([[f64; 3]; 3], [f64; 3])> {
    let (_, pg) = project_p(quad, g)?;
    let w = quad.weights();
    let pn: f64 = (0..w.len()).map(|k| w[k] * pg.values[k] * pg.values[k]).sum::<f64>().sqrt();
    if pn > 1e-8 {
        return Err(Error::Structure(format!("input is not micro: |Pg| = {pn:e}")));
    }
    let mut t = [[0.0; 3]; 3];
    let mut q = [0.0; 3];
    for (k, v) in quad.nodes().iter().enumerate() {
        let x = w[k] * g.values[k];
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] += x * v[i] * v[j];
            }
            q[i] += x * s2 * v[i];
        }
    }
    Ok((t, q))
}

/// Macroscopic coefficient fields on a spatial grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroState {
    pub a: Vec<f64>,
    pub b: [Vec<f64>; 3],
    pub c: Vec<f64>,
}

impl MacroState {
    /// From a distribution stored as one velocity row per grid point.
    pub fn from_rows(proj: &Projector, g: ArrayView2<f64>) -> Self {
        let coef = proj.coefficients(g);
        let col = |k: usize| coef.index_axis(Axis(1), k).to_vec();
        Self { a: col(0), b: [col(1), col(2), col(3)], c: col(4) }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.a.iter().zip(&self.c).map(|(a, c)| a + 3.0 * c).collect()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.c.iter().map(|c| 2.0 * c).collect()
    }

    pub fn u(&self) -> [Vec<f64>; 3] {
        self.b.clone()
    }

    /// ⟨g, |v|²/5 − 1⟩ = 3θ/5 − 2ρ/5.
    pub fn sigma(&self) -> Vec<f64> {
        self.a.iter().zip(&self.c).map(|(a, c)| (6.0 * c - 2.0 * (a + 3.0 * c)) / 5.0).collect()
    }

    pub fn from_fluid(rho: &[f64], u: [&[f64]; 3], theta: &[f64]) -> Self {
        let n = rho.len();
        let mut s = Self { a: vec![0.0; n], b: [vec![0.0; n], vec![0.0; n], vec![0.0; n]], c: vec![0.0; n] };
        for k in 0..n {
            let p = MacroPoint::from_fluid(rho[k], [u[0][k], u[1][k], u[2][k]], theta[k]);
            s.a[k] = p.a;
            s.c[k] = p.c;
            for i in 0..3 {
                s.b[i][k] = p.b[i];
            }
        }
        s
    }
}
