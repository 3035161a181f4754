use crate::collision::LinearizedOperator;
use crate::error::{Error, Result};
use crate::macro_micro::project_p;
use crate::velocity_space::{VelocityFunction, VelocityQuadrature};
use serde::{Deserialize, Serialize};

/// A_ij = v_i v_j − |v|²δ_ij/3 and B_i = (|v|²/2 − 5/2) v_i at the nodes.
#[derive(Debug, Clone)]
pub struct TensorAB {
    pub a: [[VelocityFunction; 3]; 3],
    pub b: [VelocityFunction; 3],
}

pub fn build_ab(quad: &VelocityQuadrature) -> TensorAB {
    let a = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            VelocityFunction::from_fn(quad, |v| {
                let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                v[i] * v[j] - if i == j { s2 / 3.0 } else { 0.0 }
            })
        })
    });
    let b = std::array::from_fn(|i| {
        VelocityFunction::from_fn(quad, |v| {
            let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            (0.5 * s2 - 2.5) * v[i]
        })
    });
    TensorAB { a, b }
}

fn norm(quad: &VelocityQuadrature, f: &[f64]) -> f64 {
    quad.weights().iter().zip(f).map(|(w, x)| w * x * x).sum::<f64>().sqrt()
}

fn dot(quad: &VelocityQuadrature, f: &[f64], g: &[f64]) -> f64 {
    quad.weights().iter().zip(f.iter().zip(g)).map(|(w, (x, y))| w * x * y).sum()
}

/// The unique solution of L x = rhs in N^⊥ and its relative residual.
pub fn solve_hat(
    op: &LinearizedOperator,
    quad: &VelocityQuadrature,
    rhs: &VelocityFunction,
) -> Result<(VelocityFunction, f64)> {
    rhs.check(quad)?;
    let rn = norm(quad, &rhs.values);
    if rn == 0.0 {
        return Ok((VelocityFunction::from_fn(quad, |_| 0.0), 0.0));
    }
    let (_, p) = project_p(quad, rhs)?;
    let pn = norm(quad, &p.values);
    if pn > 1e-8 * rn.max(1.0) {
        return Err(Error::Structure(format!("right-hand side has a null-space component of size {pn:e}")));
    }
    let x = op.solve_complement(&rhs.values);
    let xf = VelocityFunction::new(quad, x)?;
    let (_, px) = project_p(quad, &xf)?;
    let x: Vec<f64> = xf.values.iter().zip(&px.values).map(|(a, b)| a - b).collect();
    let xf = VelocityFunction::new(quad, x)?;
    let lx = op.apply(&xf)?;
    let res: Vec<f64> = lx.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
    let rel = norm(quad, &res) / rn;
    if !(rel <= 1e-6) {
        return Err(Error::Numerical(format!("hat solve residual {rel:e} exceeds 1e-6")));
    }
    Ok((xf, rel))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCoefficients {
    /// (1/10) Σ_ij ⟨A_ij, Â_ij⟩, the viscosity of the limit momentum equation.
    pub mu: f64,
    /// (2/15) Σ_i ⟨B_i, B̂_i⟩.
    pub kappa: f64,
    /// Σ_ij ⟨A_ij, Â_ij⟩ without normalization.
    pub a_pairing_trace: f64,
    /// (1/15) Σ_ij ⟨A_ij, Â_ij⟩.
    pub mu_one_fifteenth: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    /// Largest deviation of ⟨A_ij, Â_kl⟩ from the isotropic pattern, relative.
    pub isotropy_a: f64,
    /// Largest off-diagonal ⟨B_i, B̂_j⟩ relative to the diagonal.
    pub isotropy_b: f64,
    #[serde(skip)]
    pub a_hat: Vec<Vec<f64>>,
    #[serde(skip)]
    pub b_hat: Vec<Vec<f64>>,
}

impl TransportCoefficients {
    pub fn a_hat(&self, i: usize, j: usize) -> &[f64] {
        &self.a_hat[3 * i + j]
    }

    pub fn b_hat(&self, i: usize) -> &[f64] {
        &self.b_hat[i]
    }
}

pub fn compute_mu_kappa(op: &LinearizedOperator, quad: &VelocityQuadrature, ab: &TensorAB) -> Result<TransportCoefficients> {
    let mut a_hat = Vec::with_capacity(9);
    let mut residual_a: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let (x, r) = solve_hat(op, quad, &ab.a[i][j])?;
            residual_a = residual_a.max(r);
            a_hat.push(x.values);
        }
    }
    let mut b_hat = Vec::with_capacity(3);
    let mut residual_b: f64 = 0.0;
    for i in 0..3 {
        let (x, r) = solve_hat(op, quad, &ab.b[i])?;
        residual_b = residual_b.max(r);
        b_hat.push(x.values);
    }
    let mut pair = [[[[0.0; 3]; 3]; 3]; 3];
    let mut trace = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    pair[i][j][k][l] = dot(quad, &ab.a[i][j].values, &a_hat[3 * k + l]);
                }
            }
            trace += pair[i][j][i][j];
        }
    }
    let mu = trace / 10.0;
    let mut isotropy_a: f64 = 0.0;
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let iso = mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k) - 2.0 / 3.0 * d(i, j) * d(k, l));
                    isotropy_a = isotropy_a.max((pair[i][j][k][l] - iso).abs() / mu.abs());
                }
            }
        }
    }
    let mut bp = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            bp[i][j] = dot(quad, &ab.b[i].values, &b_hat[j]);
        }
    }
    let diag = (bp[0][0] + bp[1][1] + bp[2][2]) / 3.0;
    let mut isotropy_b: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { diag } else { 0.0 };
            isotropy_b = isotropy_b.max((bp[i][j] - target).abs() / diag.abs());
        }
    }
    let kappa = 2.0 / 15.0 * 3.0 * diag;
    if !(mu > 0.0) || !(kappa > 0.0) {
        return Err(Error::Numerical(format!("transport coefficients not positive: mu {mu}, kappa {kappa}")));
    }
    Ok(TransportCoefficients {
        mu,
        kappa,
        a_pairing_trace: trace,
        mu_one_fifteenth: trace / 15.0,
        residual_a,
        residual_b,
        isotropy_a,
        isotropy_b,
        a_hat,
        b_hat,
    })
}
