use super::quadrature::VelocityQuadrature;
use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2};

/// A one-dimensional operator acting along a single velocity axis, stored
/// as an `n × n` nodal matrix.
#[derive(Debug, Clone)]
pub struct AxisOp {
    pub matrix: Array2<f64>,
}

impl AxisOp {
    /// `dst = Op_axis src` for every row of a batch of nodal vectors.
    pub fn apply(&self, axis: usize, src: ArrayView2<f64>, mut dst: ArrayViewMut2<f64>) {
        let n = self.matrix.nrows();
        let nv = n * n * n;
        assert_eq!(src.ncols(), nv);
        assert_eq!(dst.ncols(), nv);
        assert!(axis < 3);
        let inner = n.pow(2 - axis as u32);
        let outer = nv / (n * inner);
        if inner == 1 {
            if let (Some(s), Some(d)) = (src.as_slice(), dst.as_slice_mut()) {
                let rows = s.len() / n;
                let s = ArrayView2::from_shape((rows, n), s).expect("shape");
                let mut d = ArrayViewMut2::from_shape((rows, n), d).expect("shape");
                ndarray::linalg::general_mat_mul(1.0, &s, &self.matrix.t(), 0.0, &mut d);
                return;
            }
        }
        let op = self.matrix.as_slice().expect("standard layout");
        for (s, mut d) in src.outer_iter().zip(dst.outer_iter_mut()) {
            let s = s.as_slice().expect("contiguous row");
            let d = d.as_slice_mut().expect("contiguous row");
            for o in 0..outer {
                let base = o * n * inner;
                for p in 0..n {
                    let out = &mut d[base + p * inner..base + (p + 1) * inner];
                    out.iter_mut().for_each(|x| *x = 0.0);
                    for q in 0..n {
                        let c = op[p * n + q];
                        if c == 0.0 {
                            continue;
                        }
                        let inp = &s[base + q * inner..base + (q + 1) * inner];
                        for (x, y) in out.iter_mut().zip(inp) {
                            *x += c * y;
                        }
                    }
                }
            }
        }
    }

    /// Apply along `axis` to a single nodal vector.
    pub fn apply_vec(&self, axis: usize, src: &[f64]) -> Vec<f64> {
        let nv = src.len();
        let s = ArrayView2::from_shape((1, nv), src).expect("shape");
        let mut out = Array2::zeros((1, nv));
        self.apply(axis, s, out.view_mut());
        out.into_raw_vec_and_offset().0
    }
}

/// Orthonormal Hermite basis h_k = He_k / sqrt(k!) of L²(M dv) per axis,
/// with nodal↔modal transforms and ladder operators.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    n: usize,
    eval: Array2<f64>,
    inv: Array2<f64>,
    to_modal: AxisOp,
    to_nodal: AxisOp,
    deriv: AxisOp,
    raise: AxisOp,
    gamma: AxisOp,
}

/// Values h_0(x)..h_{n-1}(x).
pub fn hermite_values(n: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for k in 1..n.saturating_sub(1) {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

impl HermiteBasis {
    pub fn new(quad: &VelocityQuadrature) -> Result<Self> {
        let n = quad.nodes_per_axis();
        let mut eval = Array2::zeros((n, n));
        let mut buf = vec![0.0; n];
        for (j, &x) in quad.axis_nodes().iter().enumerate() {
            hermite_values(n, x, &mut buf);
            for k in 0..n {
                eval[[j, k]] = buf[k];
            }
        }
        let inv = crate::linalg::inv(&eval)?;
        let conj = |modal: &Array2<f64>| AxisOp { matrix: eval.dot(modal).dot(&inv) };
        let mut d = Array2::zeros((n, n));
        let mut r = Array2::zeros((n, n));
        let mut g = Array2::zeros((n, n));
        for k in 0..n {
            if k >= 1 {
                d[[k - 1, k]] = (k as f64).sqrt();
            }
            if k + 1 < n {
                r[[k + 1, k]] = ((k + 1) as f64).sqrt();
            }
            g[[k, k]] = -((k + 1) as f64);
            if k + 2 < n {
                g[[k + 2, k]] = -(((k + 1) * (k + 2)) as f64).sqrt();
            }
        }
        Ok(Self {
            n,
            to_modal: AxisOp { matrix: inv.clone() },
            to_nodal: AxisOp { matrix: eval.clone() },
            deriv: conj(&d),
            raise: conj(&r),
            gamma: conj(&g),
            eval,
            inv,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    /// Highest Hermite degree represented along each axis.
    pub fn max_degree(&self) -> usize {
        self.n - 1
    }

    /// `H[j][k] = h_k(x_j)` on the axis nodes.
    pub fn axis_eval(&self) -> &Array2<f64> {
        &self.eval
    }

    pub fn axis_inverse(&self) -> &Array2<f64> {
        &self.inv
    }

    /// Nodal ∂/∂v along one axis (exact on the Hermite span).
    pub fn derivative(&self) -> &AxisOp {
        &self.deriv
    }

    /// Nodal (v - ∂_v) along one axis, truncated at the top degree.
    pub fn raising(&self) -> &AxisOp {
        &self.raise
    }

    /// Nodal v∂_v - v² along one axis, truncated at the top degree.
    pub fn gamma_axis(&self) -> &AxisOp {
        &self.gamma
    }

    /// Modal coefficients of a nodal vector (index `(k1 * n + k2) * n + k3`).
    pub fn to_modal(&self, values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        for a in 0..3 {
            v = self.to_modal.apply_vec(a, &v);
        }
        v
    }

    pub fn to_nodal(&self, modal: &[f64]) -> Vec<f64> {
        let mut v = modal.to_vec();
        for a in 0..3 {
            v = self.to_nodal.apply_vec(a, &v);
        }
        v
    }

    /// Evaluate a modal expansion at an arbitrary velocity.
    pub fn evaluate(&self, modal: &[f64], v: [f64; 3]) -> f64 {
        let n = self.n;
        let mut h = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for a in 0..3 {
            hermite_values(n, v[a], &mut h[a]);
        }
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let hij = h[0][i] * h[1][j];
                let row = &modal[(i * n + j) * n..(i * n + j + 1) * n];
                s += hij * row.iter().zip(&h[2]).map(|(c, x)| c * x).sum::<f64>();
            }
        }
        s
    }

    /// ∂^β_v of a nodal vector through the modal ladder.
    pub fn v_derivative(&self, values: &[f64], beta: [usize; 3]) -> Result<Vec<f64>> {
        let order: usize = beta.iter().sum();
        if order > self.max_degree() {
            return Err(Error::Structure(format!(
                "derivative order {order} exceeds the basis degree {}",
                self.max_degree()
            )));
        }
        let mut v = values.to_vec();
        for (a, &b) in beta.iter().enumerate() {
            for _ in 0..b {
                v = self.deriv.apply_vec(a, &v);
            }
        }
        Ok(v)
    }

    /// Γ = v·∇_v - |v|² applied to a batch of nodal rows.
    pub fn apply_gamma(&self, src: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(src.raw_dim());
        let mut tmp = Array2::zeros(src.raw_dim());
        for a in 0..3 {
            self.gamma.apply(a, src, tmp.view_mut());
            out += &tmp;
        }
        out
    }

    /// Sum over multi-indices helper: modal weights Σ_{|β|≤m} Π_a (k_a)_{β_a}
    /// where (k)_b is the falling factorial, so that
    /// Σ_{|β|≤m} ‖∂^β f‖² = Σ_k weight_k c_k².
    pub fn sobolev_modal_weights(&self, m: usize) -> Array1<f64> {
        let n = self.n;
        let falling = |k: usize, b: usize| -> f64 {
            if b > k {
                0.0
            } else {
                ((k - b + 1)..=k).map(|x| x as f64).product()
            }
        };
        let mut w = Array1::zeros(n * n * n);
        for k1 in 0..n {
            for k2 in 0..n {
                for k3 in 0..n {
                    let mut s = 0.0;
                    for b1 in 0..=m {
                        for b2 in 0..=(m - b1) {
                            for b3 in 0..=(m - b1 - b2) {
                                s += falling(k1, b1) * falling(k2, b2) * falling(k3, b3);
                            }
                        }
                    }
                    w[(k1 * n + k2) * n + k3] = s;
                }
            }
        }
        w
    }

    pub fn modal_op(&self) -> &AxisOp {
        &self.to_modal
    }

    pub fn nodal_op(&self) -> &AxisOp {
        &self.to_nodal
    }
}
