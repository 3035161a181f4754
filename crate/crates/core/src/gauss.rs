//! One-dimensional Gauss rules built from three-term recurrences.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        Rule {
            nodes: self.nodes.iter().map(|x| c + h * x).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }
}

/// Orthonormal polynomial values p_0..p_{n-1} and p_n at `x` for the
/// recurrence `sqrt(b_{k+1}) p_{k+1} = (x - a_k) p_k - sqrt(b_k) p_{k-1}`.
fn orthonormal_values(a: &[f64], b: &[f64], mu0: f64, x: f64, out: &mut [f64]) -> (f64, f64) {
    let n = a.len();
    let mut pm1 = 0.0;
    let mut dpm1 = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    for k in 0..n {
        out[k] = p;
        let sb_next = b[k + 1].sqrt();
        let sb = if k == 0 { 0.0 } else { b[k].sqrt() };
        let pn = ((x - a[k]) * p - sb * pm1) / sb_next;
        let dpn = (p + (x - a[k]) * dp - sb * dpm1) / sb_next;
        pm1 = p;
        dpm1 = dp;
        p = pn;
        dp = dpn;
    }
    (p, dp)
}

/// Gauss rule for the measure with recurrence coefficients `a[0..n]`,
/// `b[0..=n]` (b[0] unused) and total mass `mu0`.
pub fn from_recurrence(a: &[f64], b: &[f64], mu0: f64) -> Result<Rule> {
    let n = a.len();
    if n == 0 || b.len() < n + 1 {
        return Err(Error::InvalidInput("recurrence needs n >= 1 and n+1 b-coefficients".into()));
    }
    let mut jac = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        jac[[k, k]] = a[k];
        if k + 1 < n {
            let s = b[k + 1].sqrt();
            jac[[k, k + 1]] = s;
            jac[[k + 1, k]] = s;
        }
    }
    let eig = crate::linalg::eigvalsh(&jac)?;
    let mut vals = vec![0.0; n];
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in eig.iter() {
        let mut x = x0;
        for _ in 0..4 {
            let (p, dp) = orthonormal_values(a, b, mu0, x, &mut vals);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
        orthonormal_values(a, b, mu0, x, &mut vals);
        let s: f64 = vals.iter().map(|v| v * v).sum();
        nodes.push(x);
        weights.push(1.0 / s);
    }
    Ok(Rule { nodes, weights })
}

/// Gauss–Hermite rule for the standard normal density (weights sum to one).
pub fn hermite_probabilists(n: usize) -> Result<Rule> {
    let a = vec![0.0; n];
    let b: Vec<f64> = (0..=n).map(|k| k as f64).collect();
    let mut r = from_recurrence(&a, &b, 1.0)?;
    symmetrize(&mut r);
    Ok(r)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn legendre(n: usize) -> Result<Rule> {
    let a = vec![0.0; n];
    let b: Vec<f64> = (0..=n)
        .map(|k| {
            let k = k as f64;
            k * k / (4.0 * k * k - 1.0)
        })
        .collect();
    let mut r = from_recurrence(&a, &b, 2.0)?;
    symmetrize(&mut r);
    Ok(r)
}

fn symmetrize(r: &mut Rule) {
    let n = r.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (r.nodes[j] - r.nodes[i]);
        let w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = w;
        r.weights[j] = w;
    }
    if n % 2 == 1 {
        r.nodes[n / 2] = 0.0;
    }
}

/// Gauss rule on `[0, inf)` for the weight `r^power exp(-r^2 / scale)`,
/// obtained by the discretized Stieltjes procedure.
pub fn half_range_gaussian(n: usize, power: u32, scale: f64) -> Result<Rule> {
    let panel = legendre(48)?;
    let r_max = (scale * 80.0).sqrt() + 2.0;
    let panels = 24;
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for p in 0..panels {
        let lo = r_max * p as f64 / panels as f64;
        let hi = r_max * (p + 1) as f64 / panels as f64;
        let m = panel.mapped(lo, hi);
        for (x, w) in m.nodes.iter().zip(&m.weights) {
            xs.push(*x);
            ws.push(w * x.powi(power as i32) * (-x * x / scale).exp());
        }
    }
    stieltjes(&xs, &ws, n)
}

/// Discretized Stieltjes procedure for the discrete measure (xs, ws).
pub fn stieltjes(xs: &[f64], ws: &[f64], n: usize) -> Result<Rule> {
    let m = xs.len();
    let mu0: f64 = ws.iter().sum();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0f64; n + 1];
    let mut p_prev = vec![0.0; m];
    let mut p = vec![1.0 / mu0.sqrt(); m];
    for k in 0..n {
        let ak: f64 = (0..m).map(|i| ws[i] * xs[i] * p[i] * p[i]).sum();
        a[k] = ak;
        let sb = if k == 0 { 0.0 } else { b[k].sqrt() };
        let mut q: Vec<f64> = (0..m).map(|i| (xs[i] - ak) * p[i] - sb * p_prev[i]).collect();
        let nrm2: f64 = (0..m).map(|i| ws[i] * q[i] * q[i]).sum();
        if !(nrm2 > 0.0) {
            return Err(Error::Numerical("stieltjes procedure broke down".into()));
        }
        b[k + 1] = nrm2;
        let s = nrm2.sqrt();
        q.iter_mut().for_each(|v| *v /= s);
        p_prev = std::mem::replace(&mut p, q);
    }
    from_recurrence(&a, &b, mu0)
}

/// Equispaced trapezoid rule on the circle `[0, 2π)`.
pub fn trapezoid_circle(n: usize) -> Rule {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    Rule {
        nodes: (0..n).map(|k| h * k as f64).collect(),
        weights: vec![h; n],
    }
}

/// Γ(k + 1/2) for nonnegative integer k.
pub fn gamma_half(k: usize) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for j in 0..k {
        g *= j as f64 + 0.5;
    }
    g
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let r = hermite_probabilists(8).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((r.integrate(|x| x.powi(4)) - 3.0).abs() < 1e-12);
        assert!((r.integrate(|x| x.powi(14)) - 135135.0).abs() < 1e-6);
    }

    #[test]
    fn legendre_exact() {
        let r = legendre(10).unwrap();
        assert!((r.integrate(|x| x.powi(18)) - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn half_range_matches_moments() {
        let r = half_range_gaussian(6, 3, 4.0).unwrap();
        // ∫ r^{3+k} e^{-r²/4} dr = 2^{k+3} Γ((k+4)/2)
        for k in 0..12u32 {
            let exact = 2f64.powi(k as i32 + 3) * gamma_half_or_int(k + 4);
            let got = r.integrate(|x| x.powi(k as i32));
            assert!(((got - exact) / exact).abs() < 1e-12, "k={k} {got} {exact}");
        }
    }

    fn gamma_half_or_int(m: u32) -> f64 {
        // Γ(m/2)
        if m % 2 == 0 {
            factorial(m as usize / 2 - 1)
        } else {
            gamma_half((m as usize - 1) / 2)
        }
    }
}
