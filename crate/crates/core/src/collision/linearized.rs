use super::angular::AngularRule;
use super::burnett::{self, BurnettMode};
use crate::error::{Error, Result};
use crate::gauss;
use crate::velocity_space::{collision_frequency, QuadKey, VelocityFunction, VelocityQuadrature};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use crate::linalg;

/// Hard-sphere linearized collision operator L = ν + K on a velocity grid.
///
/// On the polynomials of total degree ≤ D (D = nodes_per_axis − 1) L acts
/// through its exact Galerkin blocks in the Burnett basis; on the nodal
/// complement it acts as the projected multiplication by ν.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    key: QuadKey,
    degree: usize,
    angular_order: usize,
    weights: Array1<f64>,
    nu: VelocityFunction,
    modes: Vec<BurnettMode>,
    basis: Array2<f64>,
    wbasis: Array2<f64>,
    lambda: Array2<f64>,
    blocks: Vec<Array2<f64>>,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
    null_basis: Vec<VelocityFunction>,
    spectral_gap: f64,
    coercivity: f64,
    tol_null: f64,
    stored: Option<Array2<f64>>,
}

/// Galerkin blocks λ^l_{n'n} = ⟨L ψ_{nlm}, ψ_{n'lm}⟩ for 2n + l ≤ degree.
///
/// The weak form ⟨Lg, ψ⟩ = ∫∫∫ M M₁ k g (ψ + ψ₁ − ψ' − ψ₁') is summed over m
/// with the addition theorem and reduced by rotation invariance to
/// v − v₁ ∥ e_z and (v + v₁)/2 in the xz-plane. Each factor is integrated by
/// a Gauss rule exact for the polynomial integrand.
pub fn burnett_blocks(degree: usize, angular_order: usize) -> Result<Vec<Array2<f64>>> {
    let d = degree;
    let m = d + 1;
    let r_rule = gauss::half_range_gaussian(m, 3, 4.0)?;
    let v_rule = gauss::half_range_gaussian(m, 2, 1.0)?;
    let th_rule = gauss::legendre(m)?;
    let a_rule = gauss::legendre(m.max(angular_order))?.mapped(0.0, 1.0);
    let b_rule = gauss::trapezoid_circle((d + 2).max(2 * angular_order));
    let n_of = |l: usize| (d - l) / 2 + 1;
    let norms: Vec<Vec<f64>> = (0..=d).map(|l| (0..n_of(l)).map(|n| burnett::radial_norm(n, l)).collect()).collect();

    let radial = |s2: f64, out: &mut Vec<Vec<f64>>| {
        let t = s2 / 2.0;
        for l in 0..=d {
            let alpha = l as f64 + 0.5;
            let mut lm1 = 0.0;
            let mut lk = 1.0;
            for k in 0..n_of(l) {
                out[l][k] = lk * norms[l][k];
                let kf = k as f64;
                let next = if k == 0 { 1.0 + alpha - t } else { ((2.0 * kf + 1.0 + alpha - t) * lk - (kf + alpha) * lm1) / (kf + 1.0) };
                lm1 = lk;
                lk = next;
            }
        }
    };
    let legendre_solid = |x: f64, y: f64, out: &mut [f64]| {
        out[0] = 1.0;
        if d >= 1 {
            out[1] = x;
        }
        for l in 1..d {
            let lf = l as f64;
            out[l + 1] = ((2.0 * lf + 1.0) * x * out[l] - lf * y * out[l - 1]) / (lf + 1.0);
        }
    };

    let mut acc: Vec<Array2<f64>> = (0..=d).map(|l| Array2::zeros((n_of(l), n_of(l)))).collect();
    let mut rv: Vec<Vec<f64>> = (0..=d).map(|l| vec![0.0; n_of(l)]).collect();
    let mut ru = rv.clone();
    let mut q = vec![0.0; d + 1];
    let mut bracket: Vec<Vec<f64>> = rv.clone();
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];

    for (&vr, &vw) in v_rule.nodes.iter().zip(&v_rule.weights) {
        for (&ct, &tw) in th_rule.nodes.iter().zip(&th_rule.weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            let big_v = [vr * st, 0.0, vr * ct];
            for (&r, &rw) in r_rule.nodes.iter().zip(&r_rule.weights) {
                let v = [big_v[0], big_v[1], big_v[2] + 0.5 * r];
                let v1 = [big_v[0], big_v[1], big_v[2] - 0.5 * r];
                let vv = dot(v, v);
                radial(vv, &mut rv);
                for b in bracket.iter_mut() {
                    b.iter_mut().for_each(|x| *x = 0.0);
                }
                let mut add = |u: [f64; 3], sign: f64, scale: f64, ru: &mut Vec<Vec<f64>>, bracket: &mut Vec<Vec<f64>>| {
                    let uu = dot(u, u);
                    radial(uu, ru);
                    legendre_solid(dot(v, u), vv * uu, &mut q);
                    for l in 0..=d {
                        let f = sign * scale * q[l];
                        for (bk, rk) in bracket[l].iter_mut().zip(&ru[l]) {
                            *bk += f * rk;
                        }
                    }
                };
                // ψ and ψ₁ terms do not depend on ω; weight them by ∫ cos α dα dβ.
                let ang_mass: f64 = a_rule.nodes.iter().zip(&a_rule.weights).map(|(c, w)| c * w).sum::<f64>()
                    * b_rule.weights.iter().sum::<f64>();
                add(v, 1.0, ang_mass, &mut ru, &mut bracket);
                add(v1, 1.0, ang_mass, &mut ru, &mut bracket);
                for (&ca, &aw) in a_rule.nodes.iter().zip(&a_rule.weights) {
                    let sa = (1.0 - ca * ca).max(0.0).sqrt();
                    for (&be, &bw) in b_rule.nodes.iter().zip(&b_rule.weights) {
                        let om = [sa * be.cos(), sa * be.sin(), ca];
                        let c = r * ca;
                        let vp = [v[0] - c * om[0], v[1] - c * om[1], v[2] - c * om[2]];
                        let v1p = [v1[0] + c * om[0], v1[1] + c * om[1], v1[2] + c * om[2]];
                        let wgt = aw * bw * ca;
                        add(vp, -1.0, wgt, &mut ru, &mut bracket);
                        add(v1p, -1.0, wgt, &mut ru, &mut bracket);
                    }
                }
                let w = vw * tw * rw;
                for l in 0..=d {
                    let a = &mut acc[l];
                    for (np, b) in bracket[l].iter().enumerate() {
                        for (n, rvn) in rv[l].iter().enumerate() {
                            a[[np, n]] += w * b * rvn;
                        }
                    }
                }
            }
        }
    }
    let pi = std::f64::consts::PI;
    let c = 1.0 / (4.0 * pi * pi * pi);
    for (l, a) in acc.iter_mut().enumerate() {
        // λ^l_{n'n}: multiply by |v|^l pairing already inside q_l; symmetrize.
        *a *= c;
        let t = a.t().to_owned();
        *a = (&*a + &t) * 0.5;
        if l == 0 {
            for n in 0..2.min(n_of(0)) {
                a.row_mut(n).fill(0.0);
                a.column_mut(n).fill(0.0);
            }
        }
        if l == 1 {
            a.row_mut(0).fill(0.0);
            a.column_mut(0).fill(0.0);
        }
    }
    Ok(acc)
}

pub fn estimate_coercivity(op: &LinearizedOperator) -> f64 {
    op.coercivity()
}

pub fn assemble_l(quad: &VelocityQuadrature, rule: &AngularRule) -> Result<LinearizedOperator> {
    LinearizedOperator::assemble(quad, rule)
}

impl LinearizedOperator {
    pub fn assemble(quad: &VelocityQuadrature, rule: &AngularRule) -> Result<Self> {
        let degree = quad.nodes_per_axis() - 1;
        let blocks = burnett_blocks(degree, rule.order())?;
        let mut op = Self::skeleton(quad, rule.order(), blocks)?;
        op.factor()?;
        Ok(op)
    }

    fn skeleton(quad: &VelocityQuadrature, angular_order: usize, blocks: Vec<Array2<f64>>) -> Result<Self> {
        let degree = quad.nodes_per_axis() - 1;
        let mut modes = burnett::modes(degree);
        modes.sort_by_key(|m| !m.is_invariant());
        let nv = quad.len();
        let ns = modes.len();
        let eval = burnett::BurnettEvaluator::new(modes.clone());
        let mut basis = Array2::zeros((nv, ns));
        let mut buf = vec![0.0; ns];
        for (j, v) in quad.nodes().iter().enumerate() {
            eval.eval(*v, &mut buf);
            basis.row_mut(j).assign(&Array1::from(buf.clone()));
        }
        let weights = Array1::from(quad.weights().to_vec());
        // W-orthonormalize in order; invariants first keeps their span exact.
        let wb = &basis * &weights.view().insert_axis(Axis(1));
        let gram = basis.t().dot(&wb);
        let defect = (&gram - &Array2::<f64>::eye(ns)).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if defect > 1e-9 {
            let chol = linalg::cholesky_upper(&gram)?;
            let inv = linalg::inv(&chol)?;
            basis = basis.dot(&inv);
        }
        let wbasis = &basis * &weights.view().insert_axis(Axis(1));

        let mut lambda = Array2::zeros((ns, ns));
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                if a.l == b.l && a.m == b.m {
                    lambda[[i, j]] = blocks[a.l][[a.n, b.n]];
                }
            }
        }
        let nu = collision_frequency(quad);
        let mut op = Self {
            key: quad.key(),
            degree,
            angular_order,
            weights,
            nu,
            modes,
            basis,
            wbasis,
            lambda,
            blocks,
            eigenvalues: Array1::zeros(0),
            eigenvectors: Array2::zeros((0, 0)),
            null_basis: Vec::new(),
            spectral_gap: 0.0,
            coercivity: 0.0,
            tol_null: 1e-6,
            stored: None,
        };
        op.null_basis = invariant_basis(quad)?;
        Ok(op)
    }

    /// Rebuild from a dense nodal matrix (e.g. a cached operator).
    pub fn from_dense(quad: &VelocityQuadrature, angular_order: usize, dense: &Array2<f64>) -> Result<Self> {
        let nv = quad.len();
        if dense.dim() != (nv, nv) {
            return Err(Error::Structure(format!("matrix {:?} does not match {} nodes", dense.dim(), nv)));
        }
        let degree = quad.nodes_per_axis() - 1;
        let n_of = |l: usize| (degree - l) / 2 + 1;
        let placeholder: Vec<Array2<f64>> = (0..=degree).map(|l| Array2::zeros((n_of(l), n_of(l)))).collect();
        let mut op = Self::skeleton(quad, angular_order, placeholder)?;
        // Recover the Galerkin blocks from the matrix itself.
        let lam = op.wbasis.t().dot(&dense.dot(&op.basis));
        op.lambda = (&lam + &lam.t()) * 0.5;
        for (i, a) in op.modes.iter().enumerate() {
            if a.m == 0 {
                for (j, b) in op.modes.iter().enumerate() {
                    if b.l == a.l && b.m == 0 {
                        op.blocks[a.l][[a.n, b.n]] = op.lambda[[i, j]];
                    }
                }
            }
        }
        op.stored = Some(dense.clone());
        op.factor()?;
        Ok(op)
    }

    fn factor(&mut self) -> Result<()> {
        let raw = self.raw_symmetric();
        let asym = (&raw - &raw.t()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sym = (&raw + &raw.t()) * 0.5;
        let (vals, vecs) = linalg::eigh(&sym)?;
        let norm = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if asym > 1e-8 * norm {
            return Err(Error::Numerical(format!("assembled operator is not self-adjoint: defect {asym:e}")));
        }
        self.eigenvalues = vals;
        self.eigenvectors = vecs;
        self.spectral_gap = self.eigenvalues[5];
        self.coercivity = self.compute_coercivity()?;
        if !(self.coercivity > 0.0) {
            return Err(Error::Numerical(format!("coercivity constant {} is not positive", self.coercivity)));
        }
        Ok(())
    }

    fn raw_symmetric(&self) -> Array2<f64> {
        let sw = self.weights.mapv(f64::sqrt);
        if let Some(d) = &self.stored {
            let isw = sw.mapv(|x| 1.0 / x);
            return d * &sw.view().insert_axis(Axis(1)) * &isw.view().insert_axis(Axis(0));
        }
        let bh = &self.basis * &sw.view().insert_axis(Axis(1));
        let nv = bh.nrows();
        let proj = Array2::<f64>::eye(nv) - bh.dot(&bh.t());
        let scaled = &proj * &self.nu_array().insert_axis(Axis(1));
        bh.dot(&self.lambda).dot(&bh.t()) + proj.dot(&scaled)
    }

    /// W^{1/2} L W^{-1/2}, symmetric in the Euclidean sense.
    pub fn symmetric_matrix(&self) -> Array2<f64> {
        let raw = self.raw_symmetric();
        (&raw + &raw.t()) * 0.5
    }

    /// Dense nodal matrix of L.
    pub fn dense(&self) -> Array2<f64> {
        if let Some(d) = &self.stored {
            return d.clone();
        }
        let sw = self.weights.mapv(f64::sqrt);
        let isw = sw.mapv(|x| 1.0 / x);
        let sym = self.symmetric_matrix();
        &sym * &isw.view().insert_axis(Axis(1)) * &sw.view().insert_axis(Axis(0))
    }

    fn nu_array(&self) -> Array1<f64> {
        Array1::from(self.nu.values.clone())
    }

    fn compute_coercivity(&self) -> Result<f64> {
        let k = 5;
        let nv = self.eigenvalues.len();
        let z = self.eigenvectors.slice(s![.., k..]).to_owned();
        let lam = self.eigenvalues.slice(s![k..]).to_owned();
        if lam.iter().any(|&x| x <= 0.0) {
            return Ok(lam.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0));
        }
        let nz = &z * &self.nu_array().insert_axis(Axis(1));
        let mut m = z.t().dot(&nz);
        let is = lam.mapv(|x| 1.0 / x.sqrt());
        m = &m * &is.view().insert_axis(Axis(1)) * &is.view().insert_axis(Axis(0));
        let m = (&m + &m.t()) * 0.5;
        let (ev, _) = linalg::eigh(&m)?;
        let top = ev[nv - k - 1];
        Ok(1.0 / top)
    }

    pub fn key(&self) -> QuadKey {
        self.key
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    pub fn nu(&self) -> &VelocityFunction {
        &self.nu
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Smallest eigenvalue of L on N^⊥ in the unweighted form.
    pub fn spectral_gap(&self) -> f64 {
        self.spectral_gap
    }

    /// Largest δ with ⟨Lf, f⟩ ≥ δ ‖(I − P)f‖²_ν on the grid.
    pub fn coercivity(&self) -> f64 {
        self.coercivity
    }

    pub fn tol_null(&self) -> f64 {
        self.tol_null
    }

    /// Largest eigenvalue, used as ‖L‖.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Eigenvalues of L in ascending order.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Nodal eigenvector `k` of L, W-normalized.
    pub fn eigenfunction(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().zip(self.weights.iter()).map(|(y, w)| y / w.sqrt()).collect()
    }

    pub fn null_basis(&self) -> &[VelocityFunction] {
        &self.null_basis
    }

    /// Galerkin blocks λ^l (rows/columns indexed by the radial index n).
    pub fn blocks(&self) -> &[Array2<f64>] {
        &self.blocks
    }

    pub fn modes(&self) -> &[BurnettMode] {
        &self.modes
    }

    /// Burnett basis sampled at the nodes (W-orthonormal columns).
    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    /// L applied to every row of a batch of nodal vectors.
    pub fn apply_rows(&self, g: ArrayView2<f64>) -> Array2<f64> {
        if let Some(d) = &self.stored {
            return g.dot(&d.t());
        }
        let c = g.dot(&self.wbasis);
        let mut h = g.to_owned() - c.dot(&self.basis.t());
        let nu = self.nu_array();
        h *= &nu.view().insert_axis(Axis(0));
        let d = h.dot(&self.wbasis);
        let coef = c.dot(&self.lambda) - d;
        h + coef.dot(&self.basis.t())
    }

    pub fn apply(&self, f: &VelocityFunction) -> Result<VelocityFunction> {
        if f.key() != self.key {
            return Err(Error::Structure("function and operator use different quadratures".into()));
        }
        let g = ArrayView2::from_shape((1, f.values.len()), &f.values).expect("shape");
        let out = self.apply_rows(g);
        Ok(VelocityFunction::from_parts(out.into_raw_vec_and_offset().0, self.key))
    }

    /// Transposed nodal matrix of (I + τL)⁻¹, for `rows · Mᵀ` application.
    pub fn resolvent_rows(&self, tau: f64) -> Array2<f64> {
        self.function_rows(|l| 1.0 / (1.0 + tau * l))
    }

    /// Transposed nodal matrix of f(L); the five null eigenvalues are taken
    /// as exactly zero.
    pub fn function_rows(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let vals = Array1::from_iter(self.eigenvalues.iter().enumerate().map(|(k, &l)| f(if k < 5 { 0.0 } else { l })));
        self.spectral_rows(&vals)
    }

    /// Transposed nodal matrix of the pseudo-inverse of L on N^⊥.
    pub fn pseudo_inverse_rows(&self) -> Array2<f64> {
        let mut f = self.eigenvalues.mapv(|l| 1.0 / l);
        for k in 0..5 {
            f[k] = 0.0;
        }
        self.spectral_rows(&f)
    }

    /// x = L⁺ rhs, the solution on N^⊥ (null modes dropped).
    pub fn solve_complement(&self, rhs: &[f64]) -> Vec<f64> {
        let sw = self.weights.mapv(f64::sqrt);
        let y = Array1::from_iter(rhs.iter().zip(sw.iter()).map(|(r, s)| r * s));
        let mut c = self.eigenvectors.t().dot(&y);
        for (k, x) in c.iter_mut().enumerate() {
            *x = if k < 5 { 0.0 } else { *x / self.eigenvalues[k] };
        }
        let z = self.eigenvectors.dot(&c);
        z.iter().zip(sw.iter()).map(|(z, s)| z / s).collect()
    }

    fn spectral_rows(&self, f: &Array1<f64>) -> Array2<f64> {
        let sw = self.weights.mapv(f64::sqrt);
        let isw = sw.mapv(|x| 1.0 / x);
        let u = &self.eigenvectors;
        let left = u * &sw.view().insert_axis(Axis(1));
        let right = u * &isw.view().insert_axis(Axis(1)) * &f.view().insert_axis(Axis(0));
        left.dot(&right.t())
    }
}

/// Orthonormal nodal basis of span{1, v₁, v₂, v₃, |v|²}.
pub fn invariant_basis(quad: &VelocityQuadrature) -> Result<Vec<VelocityFunction>> {
    let raw: Vec<Vec<f64>> = vec![
        quad.sample(|_| 1.0),
        quad.sample(|v| v[0]),
        quad.sample(|v| v[1]),
        quad.sample(|v| v[2]),
        quad.sample(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]),
    ];
    let w = quad.weights();
    let ip = |a: &[f64], b: &[f64]| -> f64 { (0..w.len()).map(|k| w[k] * a[k] * b[k]).sum() };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut f in raw {
        for _ in 0..2 {
            for e in &out {
                let c = ip(&f, e);
                f.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = ip(&f, &f).sqrt();
        if n < 1e-10 {
            return Err(Error::Numerical("collision invariants are degenerate on this quadrature".into()));
        }
        f.iter_mut().for_each(|x| *x /= n);
        out.push(f);
    }
    out.into_iter().map(|f| VelocityFunction::new(quad, f)).collect()
}
