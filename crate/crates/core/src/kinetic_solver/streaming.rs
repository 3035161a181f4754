use super::model::KineticModel;
use crate::spatial_field::FftNd;
use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

/// Which terms of the transport/field right-hand side to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parts {
    /// −(1/ε)v·∇g.
    pub stream: bool,
    /// (γ/ε)v·∇φ.
    pub forcing: bool,
    /// γ∇φ·(v − ∇_v)g.
    pub product: bool,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Spectral tables for free streaming and the field terms on one grid.
#[derive(Debug, Clone)]
pub(crate) struct Streaming {
    nx: usize,
    kvec: Vec<[f64; 3]>,
    kk: Vec<f64>,
    neg: Vec<usize>,
    mask: Vec<bool>,
    fft: FftNd,
}

impl Streaming {
    pub fn new(model: &KineticModel) -> Self {
        let grid = &model.grid;
        let fft = FftNd::new(grid);
        let nx = grid.len();
        let kvec: Vec<[f64; 3]> = (0..nx).map(|i| grid.wavevector(i)).collect();
        let kk = kvec.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        let neg = (0..nx).map(|i| fft.negate_index(i)).collect();
        Self { nx, kvec, kk, neg, mask: grid.dealias_mask(), fft }
    }

    fn kv(&self, i: usize, v: &[f64; 3]) -> f64 {
        self.kvec[i][0] * v[0] + self.kvec[i][1] * v[1] + self.kvec[i][2] * v[2]
    }

    /// φ̂ from the density of g.
    pub fn potential_spectrum(&self, model: &KineticModel, g: ArrayView2<f64>) -> Vec<Complex64> {
        let rho = model.velocity.density(g);
        let mut fft = self.fft.clone();
        let spec = fft.forward_real(&rho);
        spec.iter()
            .zip(&self.kk)
            .map(|(z, &kk)| if kk == 0.0 { ZERO } else { -model.gamma * z / kk })
            .collect()
    }

    /// γ∇φ·(v − ∇_v)g per row, before dealiasing.
    fn field_product(&self, model: &KineticModel, g: ArrayView2<f64>, phi_hat: &[Complex64]) -> Array2<f64> {
        let d = model.grid.dim();
        let mut fft = self.fft.clone();
        let mut out = Array2::zeros(g.raw_dim());
        let mut tmp = Array2::zeros(g.raw_dim());
        for a in 0..d {
            let mut e: Vec<Complex64> = phi_hat.iter().enumerate().map(|(i, z)| Complex64::new(0.0, self.kvec[i][a]) * z).collect();
            fft.inverse(&mut e);
            model.velocity.raising().apply(a, g, tmp.view_mut());
            for (mut row, (t, ex)) in out.outer_iter_mut().zip(tmp.outer_iter().zip(&e)) {
                let s = model.gamma * ex.re;
                row.zip_mut_with(&t, |o, x| *o += s * x);
            }
        }
        out
    }

    /// Right-hand side of the transport and field part,
    /// −(1/ε)v·∇g + (γ/ε)v·∇φ + γ∇φ·(v − ∇_v)g, with φ solved from g and the
    /// quadratic product dealiased.
    pub fn rhs(&self, model: &KineticModel, g: ArrayView2<f64>) -> Array2<f64> {
        self.rhs_parts(model, g, Parts { stream: true, forcing: true, product: true })
    }

    pub fn rhs_parts(&self, model: &KineticModel, g: ArrayView2<f64>, parts: Parts) -> Array2<f64> {
        let phi_hat = self.potential_spectrum(model, g);
        let prod = if parts.product { Some(self.field_product(model, g, &phi_hat)) } else { None };
        let nodes = model.quad().nodes();
        let inv_eps = if parts.stream { 1.0 / model.epsilon } else { 0.0 };
        let coupling = if parts.forcing { model.gamma / model.epsilon } else { 0.0 };
        self.column_map(g, prod.as_ref().map(|p| p.view()), |j, gh, nh, out| {
            let v = &nodes[j];
            for i in 0..self.nx {
                let ikv = Complex64::new(0.0, self.kv(i, v));
                let mut r = -ikv * inv_eps * gh[i] + coupling * ikv * phi_hat[i];
                if self.mask[i] {
                    r += nh[i];
                }
                out[i] = r;
            }
        })
    }

    /// Exact free streaming g ← exp(−t v·∇/ε) g.
    pub fn free_stream(&self, model: &KineticModel, g: ArrayView2<f64>, t: f64) -> Array2<f64> {
        let nodes = model.quad().nodes();
        let s = t / model.epsilon;
        self.column_map(g, None, |j, gh, _, out| {
            let v = &nodes[j];
            for i in 0..self.nx {
                let ph = -s * self.kv(i, v);
                out[i] = Complex64::new(ph.cos(), ph.sin()) * gh[i];
            }
        })
    }

    /// Applies a per-velocity-column spectral map to g (and optionally a
    /// second real array sharing the transform), returning real rows.
    fn column_map<F>(&self, g: ArrayView2<f64>, second: Option<ArrayView2<f64>>, f: F) -> Array2<f64>
    where
        F: Fn(usize, &[Complex64], &[Complex64], &mut [Complex64]) + Sync,
    {
        let nx = self.nx;
        let nv = g.ncols();
        let gt = g.t().as_standard_layout().into_owned();
        let st = second.map(|s| s.t().as_standard_layout().into_owned());
        let pairs: Vec<usize> = (0..nv).step_by(2).collect();
        let results: Vec<(Vec<f64>, Vec<f64>)> = pairs
            .par_iter()
            .map_init(
                || (self.fft.clone(), vec![ZERO; nx], vec![ZERO; nx], vec![ZERO; nx], vec![ZERO; nx], vec![ZERO; nx]),
                |(fft, z, gh, nh, r0, r1), &j| {
                    let cols = if j + 1 < nv { 2 } else { 1 };
                    for c in 0..cols {
                        let jj = j + c;
                        let grow = gt.index_axis(Axis(0), jj);
                        match &st {
                            Some(s) => {
                                let srow = s.index_axis(Axis(0), jj);
                                for i in 0..nx {
                                    z[i] = Complex64::new(grow[i], srow[i]);
                                }
                            }
                            None => {
                                for i in 0..nx {
                                    z[i] = Complex64::new(grow[i], 0.0);
                                }
                            }
                        }
                        fft.forward(z);
                        for i in 0..nx {
                            let zc = z[self.neg[i]].conj();
                            gh[i] = (z[i] + zc) * 0.5;
                            nh[i] = (z[i] - zc) * Complex64::new(0.0, -0.5);
                        }
                        let out = if c == 0 { &mut *r0 } else { &mut *r1 };
                        f(jj, gh, nh, out);
                    }
                    if cols == 1 {
                        r1.iter_mut().for_each(|x| *x = ZERO);
                    }
                    for i in 0..nx {
                        z[i] = r0[i] + Complex64::new(0.0, 1.0) * r1[i];
                    }
                    fft.inverse(z);
                    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
                },
            )
            .collect();
        let mut out = Array2::zeros((nx, nv));
        for (p, (a, b)) in pairs.iter().zip(results) {
            for i in 0..nx {
                out[[i, *p]] = a[i];
            }
            if p + 1 < nv {
                for i in 0..nx {
                    out[[i, p + 1]] = b[i];
                }
            }
        }
        out
    }
}
