use crate::error::Result;
use crate::gauss;
use crate::linalg;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SonineResult {
    pub order: usize,
    pub mu: f64,
    pub kappa: f64,
}

fn laguerre(n: usize, alpha: f64, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n > 1 {
        out[1] = 1.0 + alpha - x;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
    }
}

/// Trial functions of one family at one velocity, flattened over the
/// tensor components.
fn viscous(order: usize, v: [f64; 3], out: &mut [f64], lag: &mut [f64]) {
    let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    laguerre(order, 2.5, 0.5 * s2, lag);
    for p in 0..order {
        for i in 0..3 {
            for j in 0..3 {
                let a = v[i] * v[j] - if i == j { s2 / 3.0 } else { 0.0 };
                out[p * 9 + 3 * i + j] = a * lag[p];
            }
        }
    }
}

fn thermal(order: usize, v: [f64; 3], out: &mut [f64], lag: &mut [f64]) {
    let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    laguerre(order + 1, 1.5, 0.5 * s2, lag);
    for p in 0..order {
        for i in 0..3 {
            out[p * 3 + i] = v[i] * lag[p + 1];
        }
    }
}

/// Gram matrix [f_p, f_q] = ¼ ∫∫∫ M M₁ k Δf_p · Δf_q summed over components,
/// with Δf = f + f₁ − f′ − f₁′, reduced by rotation invariance.
fn brackets(order: usize, comps: usize, eval: &dyn Fn([f64; 3], &mut [f64], &mut [f64])) -> Result<Array2<f64>> {
    let deg = 2 * (2 + 2 * order);
    let m = deg / 2 + 1;
    let v_rule = gauss::half_range_gaussian(m, 2, 1.0)?;
    let th_rule = gauss::legendre(m)?;
    let r_rule = gauss::half_range_gaussian(m, 3, 4.0)?;
    let a_rule = gauss::legendre(m + 1)?.mapped(0.0, 1.0);
    let b_rule = gauss::trapezoid_circle(deg + 2);
    let n = order * comps;
    let mut lag = vec![0.0; order + 2];
    let (mut f, mut f1, mut fp, mut fp1) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut gram = Array2::<f64>::zeros((order, order));
    for (&vr, &vw) in v_rule.nodes.iter().zip(&v_rule.weights) {
        for (&ct, &tw) in th_rule.nodes.iter().zip(&th_rule.weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for (&r, &rw) in r_rule.nodes.iter().zip(&r_rule.weights) {
                let v = [vr * st, 0.0, vr * ct + 0.5 * r];
                let v1 = [vr * st, 0.0, vr * ct - 0.5 * r];
                eval(v, &mut f, &mut lag);
                eval(v1, &mut f1, &mut lag);
                for (&ca, &aw) in a_rule.nodes.iter().zip(&a_rule.weights) {
                    let sa = (1.0 - ca * ca).max(0.0).sqrt();
                    for (&be, &bw) in b_rule.nodes.iter().zip(&b_rule.weights) {
                        let om = [sa * be.cos(), sa * be.sin(), ca];
                        let c = r * ca;
                        let vp = [v[0] - c * om[0], v[1] - c * om[1], v[2] - c * om[2]];
                        let v1p = [v1[0] + c * om[0], v1[1] + c * om[1], v1[2] + c * om[2]];
                        eval(vp, &mut fp, &mut lag);
                        eval(v1p, &mut fp1, &mut lag);
                        let w = vw * tw * rw * aw * bw * ca;
                        for p in 0..order {
                            for q in p..order {
                                let mut s = 0.0;
                                for k in 0..comps {
                                    let dp = f[p * comps + k] + f1[p * comps + k] - fp[p * comps + k] - fp1[p * comps + k];
                                    let dq = f[q * comps + k] + f1[q * comps + k] - fp[q * comps + k] - fp1[q * comps + k];
                                    s += dp * dq;
                                }
                                gram[[p, q]] += w * s;
                            }
                        }
                    }
                }
            }
        }
    }
    // (2π)^{-3} M-normalization, 1/(2π) kernel, 2 hemispheres, 4π·2π from
    // the frame rotations, 1/4 from the symmetrized weak form.
    let scale = 0.25 / (PI * PI);
    for p in 0..order {
        for q in 0..p {
            gram[[p, q]] = gram[[q, p]];
        }
    }
    Ok(gram * scale)
}

/// ∫ M(v) h(|v|²) dv by a radial Gauss rule exact for polynomial h of
/// degree ≤ 2·points − 1 in |v|.
fn radial_moment(points: usize, h: impl Fn(f64) -> f64) -> Result<f64> {
    let rule = gauss::half_range_gaussian(points, 2, 2.0)?;
    let c = 4.0 * PI * (2.0 * PI).powf(-1.5);
    Ok(c * rule.nodes.iter().zip(&rule.weights).map(|(r, w)| w * h(r * r)).sum::<f64>())
}

/// μ and κ from a Galerkin expansion of Â and B̂ in `order` Sonine
/// polynomials, independent of the velocity grid.
pub fn sonine_oracle(order: usize) -> Result<SonineResult> {
    let order = order.max(1);
    let gv = brackets(order, 9, &|v, out, lag| viscous(order, v, out, lag))?;
    let gt = brackets(order, 3, &|v, out, lag| thermal(order, v, out, lag))?;
    let pts = order + 6;
    let mut rv = Array1::zeros(order);
    let mut rt = Array1::zeros(order);
    for p in 0..order {
        rv[p] = radial_moment(pts, |s2| {
            let mut l = vec![0.0; order + 2];
            laguerre(order, 2.5, 0.5 * s2, &mut l);
            2.0 / 3.0 * s2 * s2 * l[p]
        })?;
        rt[p] = radial_moment(pts, |s2| {
            let mut l = vec![0.0; order + 2];
            laguerre(order + 1, 1.5, 0.5 * s2, &mut l);
            s2 * (0.5 * s2 - 2.5) * l[p + 1]
        })?;
    }
    let xv = linalg::inv(&gv)?.dot(&rv);
    let xt = linalg::inv(&gt)?.dot(&rt);
    Ok(SonineResult { order, mu: xv.dot(&rv) / 10.0, kappa: 2.0 / 15.0 * xt.dot(&rt) })
}
