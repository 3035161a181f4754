use super::angular::{frame, AngularRule};
use super::burnett::{BurnettEvaluator, BurnettMode};
use super::linearized::LinearizedOperator;
use crate::error::{Error, Result};
use crate::gauss;
use crate::velocity_space::{HermiteBasis, VelocityFunction, VelocityQuadrature};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Micro Burnett modes of degree ≤ 3 carrying the micro–micro part of Q.
pub fn micro_modes() -> Vec<BurnettMode> {
    let mut out = Vec::new();
    for (n, l) in [(0usize, 2usize), (1, 1), (0, 3)] {
        for m in -(l as i32)..=(l as i32) {
            out.push(BurnettMode { n, l, m });
        }
    }
    out
}

/// T[(i·K + j), k] = ⟨Q(ψ_i, ψ_j), ψ_k⟩ over the micro modes.
pub fn micro_tensor() -> &'static Array2<f64> {
    static T: OnceLock<Array2<f64>> = OnceLock::new();
    T.get_or_init(build_micro_tensor)
}

fn build_micro_tensor() -> Array2<f64> {
    let eval = BurnettEvaluator::new(micro_modes());
    let k = eval.len();
    let gh = gauss::hermite_probabilists(5).expect("hermite rule");
    let v_nodes: Vec<f64> = gh.nodes.iter().map(|x| x / 2f64.sqrt()).collect();
    let v_weights: Vec<f64> = gh.weights.iter().map(|w| w * PI.sqrt()).collect();
    let r_rule = gauss::half_range_gaussian(5, 3, 4.0).expect("radial rule");
    let dirs = AngularRule::new(5).expect("angular rule");
    let a_rule = gauss::legendre(6).expect("legendre rule").mapped(0.0, 1.0);
    let b_rule = gauss::trapezoid_circle(10);
    let pref = (2.0 * PI).powi(-3) / (2.0 * PI) * 2.0;

    let chunk = 4096;
    let mut x = Array2::<f64>::zeros((chunk, k * k));
    let mut d = Array2::<f64>::zeros((chunk, k));
    let mut acc = Array2::<f64>::zeros((k * k, k));
    let mut fill = 0usize;
    let (mut pv, mut pv1, mut pp, mut pp1) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    let flush = |x: &Array2<f64>, d: &Array2<f64>, fill: usize, acc: &mut Array2<f64>| {
        if fill > 0 {
            *acc += &x.slice(s![..fill, ..]).t().dot(&d.slice(s![..fill, ..]));
        }
    };
    for (i0, &x0) in v_nodes.iter().enumerate() {
        for (i1, &x1) in v_nodes.iter().enumerate() {
            for (i2, &x2) in v_nodes.iter().enumerate() {
                let wv = v_weights[i0] * v_weights[i1] * v_weights[i2];
                let big_v = [x0, x1, x2];
                for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
                    for (dir, &wd) in dirs.directions().iter().zip(dirs.weights()) {
                        let (e1, e2) = frame(*dir);
                        let v: [f64; 3] = std::array::from_fn(|a| big_v[a] + 0.5 * r * dir[a]);
                        let v1: [f64; 3] = std::array::from_fn(|a| big_v[a] - 0.5 * r * dir[a]);
                        eval.eval(v, &mut pv);
                        eval.eval(v1, &mut pv1);
                        for (&ca, &wa) in a_rule.nodes.iter().zip(&a_rule.weights) {
                            let sa = (1.0 - ca * ca).max(0.0).sqrt();
                            for (&be, &wb) in b_rule.nodes.iter().zip(&b_rule.weights) {
                                let (sb, cb) = be.sin_cos();
                                let om: [f64; 3] = std::array::from_fn(|a| ca * dir[a] + sa * (cb * e1[a] + sb * e2[a]));
                                // (v - v1)·ω = r cos α
                                let c = r * ca;
                                let vp: [f64; 3] = std::array::from_fn(|a| v[a] - c * om[a]);
                                let v1p: [f64; 3] = std::array::from_fn(|a| v1[a] + c * om[a]);
                                eval.eval(vp, &mut pp);
                                eval.eval(v1p, &mut pp1);
                                let w = 0.25 * pref * wv * wr * wd * wa * wb * ca;
                                let mut xr = x.row_mut(fill);
                                for i in 0..k {
                                    for j in 0..k {
                                        xr[i * k + j] = w * pv[i] * pv1[j];
                                    }
                                }
                                let mut dr = d.row_mut(fill);
                                for q in 0..k {
                                    dr[q] = pp[q] + pp1[q] - pv[q] - pv1[q];
                                }
                                fill += 1;
                                if fill == chunk {
                                    flush(&x, &d, fill, &mut acc);
                                    fill = 0;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    flush(&x, &d, fill, &mut acc);
    // symmetrize in (i, j): ψ_i ψ_j1 + ψ_j ψ_i1
    let mut t = Array2::zeros((k * k, k));
    for i in 0..k {
        for j in 0..k {
            let row = &acc.row(i * k + j) + &acc.row(j * k + i);
            t.row_mut(i * k + j).assign(&row);
        }
    }
    t
}

/// The symmetric bilinear collision operator Q on a velocity grid.
///
/// Q(g, g) is split with Pg = a + b·v + c|v|² and h = (I − P)g. Translation
/// and dilation covariance of the hard-sphere kernel give every term that
/// involves Pg through L and the ladder operators R_i = v_i − ∂_i and
/// Γ = v·∇ − |v|²; the micro–micro part is the Galerkin projection of
/// Q(h, h) onto the micro modes of degree ≤ 3.
#[derive(Debug, Clone)]
pub struct BilinearOperator {
    hermite: HermiteBasis,
    invariants: Array2<f64>,
    v_cols: Array2<f64>,
    micro: Array2<f64>,
    wmicro: Array2<f64>,
    tensor: Array2<f64>,
}

impl BilinearOperator {
    pub fn new(quad: &VelocityQuadrature) -> Result<Self> {
        let hermite = HermiteBasis::new(quad)?;
        if hermite.max_degree() < 3 {
            return Err(Error::InvalidInput("velocity grid too coarse for the collision operator".into()));
        }
        let nv = quad.len();
        let w = quad.weights();
        let mut invariants = Array2::zeros((nv, 5));
        let mut v_cols = Array2::zeros((nv, 4));
        for (j, v) in quad.nodes().iter().enumerate() {
            let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let row = [1.0, v[0], v[1], v[2], s2];
            for c in 0..5 {
                invariants[[j, c]] = w[j] * row[c];
            }
            for c in 0..4 {
                v_cols[[j, c]] = row[c + 1];
            }
        }
        let eval = BurnettEvaluator::new(micro_modes());
        let mut micro = Array2::zeros((nv, eval.len()));
        let mut buf = vec![0.0; eval.len()];
        for (j, v) in quad.nodes().iter().enumerate() {
            eval.eval(*v, &mut buf);
            micro.row_mut(j).assign(&Array1::from(buf.clone()));
        }
        let wa = Array1::from(w.to_vec());
        let wmicro = &micro * &wa.view().insert_axis(Axis(1));
        Ok(Self { hermite, invariants, v_cols, micro, wmicro, tensor: micro_tensor().clone() })
    }

    pub fn hermite(&self) -> &HermiteBasis {
        &self.hermite
    }

    /// Hydrodynamic coefficients (a, b₁, b₂, b₃, c) of every row.
    pub fn macro_coefficients(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let m = g.dot(&self.invariants);
        let mut out = Array2::zeros((g.nrows(), 5));
        for (mut o, r) in out.outer_iter_mut().zip(m.outer_iter()) {
            o[0] = 0.5 * (5.0 * r[0] - r[4]);
            o[1] = r[1];
            o[2] = r[2];
            o[3] = r[3];
            o[4] = (r[4] - 3.0 * r[0]) / 6.0;
        }
        out
    }

    fn macro_rows(&self, coef: &Array2<f64>) -> Array2<f64> {
        let nv = self.v_cols.nrows();
        let mut p = Array2::zeros((coef.nrows(), nv));
        for (mut row, c) in p.outer_iter_mut().zip(coef.outer_iter()) {
            for (j, x) in row.iter_mut().enumerate() {
                *x = c[0] + c[1] * self.v_cols[[j, 0]] + c[2] * self.v_cols[[j, 1]] + c[3] * self.v_cols[[j, 2]] + c[4] * self.v_cols[[j, 3]];
            }
        }
        p
    }

    /// Σ_i b_i R_i f for each row, with b taken from `coef`.
    fn raise_weighted(&self, coef: &Array2<f64>, f: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(f.raw_dim());
        let mut tmp = Array2::zeros(f.raw_dim());
        for a in 0..3 {
            self.hermite.raising().apply(a, f, tmp.view_mut());
            tmp *= &coef.column(1 + a).insert_axis(Axis(1));
            out += &tmp;
        }
        out
    }

    /// Micro–micro part from the Galerkin tensor.
    fn micro_part(&self, h: ArrayView2<f64>) -> Array2<f64> {
        let c = h.dot(&self.wmicro);
        let k = c.ncols();
        let mut outer = Array2::zeros((c.nrows(), k * k));
        for (mut o, r) in outer.outer_iter_mut().zip(c.outer_iter()) {
            for i in 0..k {
                for j in 0..k {
                    o[i * k + j] = r[i] * r[j];
                }
            }
        }
        outer.dot(&self.tensor).dot(&self.micro.t())
    }

    /// Q(g, g) for every row of `g`.
    pub fn quadratic_rows(&self, l: &LinearizedOperator, g: ArrayView2<f64>) -> Array2<f64> {
        let coef = self.macro_coefficients(g);
        let p = self.macro_rows(&coef);
        let h = &g - &p;
        let a = coef.column(0).insert_axis(Axis(1));
        let c = coef.column(4).insert_axis(Axis(1));

        let mut x = &p * &p * 0.5;
        x -= &(&h * &a);
        x += &self.raise_weighted(&coef, h.view());
        x -= &(&self.hermite.apply_gamma(h.view()) * &c);
        x -= &(&h * &c * 4.0);

        let lh = l.apply_rows(h.view());
        let mut out = l.apply_rows(x.view());
        out -= &self.raise_weighted(&coef, lh.view());
        out += &(&self.hermite.apply_gamma(lh.view()) * &c);
        out += &self.micro_part(h.view());
        out
    }

    /// Q(g, h) row by row through polarization of the quadratic form.
    pub fn bilinear_rows(&self, l: &LinearizedOperator, g: ArrayView2<f64>, h: ArrayView2<f64>) -> Array2<f64> {
        let plus = &g + &h;
        let minus = &g - &h;
        (self.quadratic_rows(l, plus.view()) - self.quadratic_rows(l, minus.view())) * 0.25
    }
}

/// Q(g, h) on nodal vectors.
pub fn apply_q(
    op: &BilinearOperator,
    l: &LinearizedOperator,
    g: &VelocityFunction,
    h: &VelocityFunction,
) -> Result<VelocityFunction> {
    if g.key() != l.key() || h.key() != l.key() {
        return Err(Error::Structure("functions and operator use different quadratures".into()));
    }
    let nv = g.values.len();
    let gv = ArrayView2::from_shape((1, nv), &g.values).expect("shape");
    let hv = ArrayView2::from_shape((1, nv), &h.values).expect("shape");
    let out = op.bilinear_rows(l, gv, hv);
    Ok(VelocityFunction::from_parts(out.into_raw_vec_and_offset().0, l.key()))
}

/// Q(g, h)(v) at one velocity by direct quadrature of the collision
/// integral, for functions known in closed form.
///
/// v₁ − v = r ŵ with r on a Gauss–Legendre rule of `radial` points over
/// [0, |v| + 12], ŵ on `rule`, and ω on a hemisphere about ŵ resolved with
/// `omega_order` points in cos α and 2·`omega_order` in the azimuth.
pub fn q_direct(
    g: &dyn Fn([f64; 3]) -> f64,
    h: &dyn Fn([f64; 3]) -> f64,
    v: [f64; 3],
    rule: &AngularRule,
    radial: usize,
    omega_order: usize,
) -> Result<f64> {
    let vn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let r_rule = gauss::legendre(radial)?.mapped(0.0, vn + 12.0);
    let a_rule = gauss::legendre(omega_order)?.mapped(0.0, 1.0);
    let b_rule = gauss::trapezoid_circle(2 * omega_order);
    let m0 = (2.0 * PI).powf(-1.5);
    let (gv, hv) = (g(v), h(v));
    let mut acc = 0.0;
    for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
        for (dir, &wd) in rule.directions().iter().zip(rule.weights()) {
            let v1: [f64; 3] = std::array::from_fn(|a| v[a] + r * dir[a]);
            let m1 = m0 * (-0.5 * (v1[0] * v1[0] + v1[1] * v1[1] + v1[2] * v1[2])).exp();
            if m1 < 1e-300 {
                continue;
            }
            let (g1, h1) = (g(v1), h(v1));
            let (e1, e2) = frame(*dir);
            let mut inner = 0.0;
            for (&ca, &wa) in a_rule.nodes.iter().zip(&a_rule.weights) {
                let sa = (1.0 - ca * ca).max(0.0).sqrt();
                for (&be, &wb) in b_rule.nodes.iter().zip(&b_rule.weights) {
                    let (sb, cb) = be.sin_cos();
                    let om: [f64; 3] = std::array::from_fn(|a| ca * dir[a] + sa * (cb * e1[a] + sb * e2[a]));
                    // (v - v1)·ω = -r cos α
                    let c = -r * ca;
                    let vp: [f64; 3] = std::array::from_fn(|a| v[a] - c * om[a]);
                    let v1p: [f64; 3] = std::array::from_fn(|a| v1[a] + c * om[a]);
                    let gain = g(vp) * h(v1p) + h(vp) * g(v1p);
                    let loss = gv * h1 + hv * g1;
                    inner += wa * wb * ca * (gain - loss);
                }
            }
            acc += wr * wd * m1 * r * r * r * inner;
        }
    }
    // kernel |(v − v1)·ω| / 2π, both hemispheres, symmetric half
    Ok(acc * 2.0 / (2.0 * PI) * 0.5)
}
