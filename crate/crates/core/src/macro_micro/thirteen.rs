use crate::error::{Error, Result};
use crate::linalg;
use crate::velocity_space::{VelocityFunction, VelocityQuadrature};
use ndarray::Array2;

/// Labels of the thirteen moments {1, v_i, v_i², v_i|v|², v_i v_j (i < j)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentLabel {
    One,
    V(usize),
    VSq(usize),
    VEnergy(usize),
    VV(usize, usize),
}

impl MomentLabel {
    pub fn all() -> [MomentLabel; 13] {
        use MomentLabel::*;
        [One, V(0), V(1), V(2), VSq(0), VSq(1), VSq(2), VEnergy(0), VEnergy(1), VEnergy(2), VV(0, 1), VV(0, 2), VV(1, 2)]
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        match *self {
            MomentLabel::One => 1.0,
            MomentLabel::V(i) => v[i],
            MomentLabel::VSq(i) => v[i] * v[i],
            MomentLabel::VEnergy(i) => v[i] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]),
            MomentLabel::VV(i, j) => v[i] * v[j],
        }
    }

    fn index(&self) -> usize {
        Self::all().iter().position(|l| l == self).expect("label in basis")
    }
}

/// The thirteen primal functions and the dual family with ⟨e_j, e_k*⟩ = δ_jk.
#[derive(Debug, Clone)]
pub struct ThirteenMomentBasis {
    primal: Vec<VelocityFunction>,
    dual: Vec<VelocityFunction>,
    gram: Array2<f64>,
    condition: f64,
}

pub fn thirteen_basis(quad: &VelocityQuadrature) -> Result<ThirteenMomentBasis> {
    ThirteenMomentBasis::new(quad)
}

impl ThirteenMomentBasis {
    pub fn new(quad: &VelocityQuadrature) -> Result<Self> {
        if 2 * quad.nodes_per_axis() - 1 < 8 {
            return Err(Error::InvalidInput("thirteen-moment basis needs quadrature exact to degree 8".into()));
        }
        let primal: Vec<VelocityFunction> =
            MomentLabel::all().iter().map(|l| VelocityFunction::from_fn(quad, |v| l.eval(v))).collect();
        let w = quad.weights();
        let mut gram = Array2::zeros((13, 13));
        for i in 0..13 {
            for j in 0..13 {
                gram[[i, j]] = (0..w.len()).map(|k| w[k] * primal[i].values[k] * primal[j].values[k]).sum();
            }
        }
        let ev = linalg::eigvalsh(&gram)?;
        let condition = ev[12] / ev[0];
        if !(ev[0] > 0.0) || condition > 1e12 {
            return Err(Error::Numerical(format!("thirteen-moment Gram matrix condition {condition:e}")));
        }
        let inv = linalg::inv(&gram)?;
        let dual = (0..13)
            .map(|k| {
                let mut vals = vec![0.0; w.len()];
                for j in 0..13 {
                    let c = inv[[k, j]];
                    vals.iter_mut().zip(&primal[j].values).for_each(|(x, p)| *x += c * p);
                }
                VelocityFunction::new(quad, vals)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { primal, dual, gram, condition })
    }

    pub fn primal(&self) -> &[VelocityFunction] {
        &self.primal
    }

    pub fn dual(&self) -> &[VelocityFunction] {
        &self.dual
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dual_of(&self, label: MomentLabel) -> &VelocityFunction {
        &self.dual[label.index()]
    }

    /// ⟨term, e_k*⟩ for the thirteen duals.
    pub fn extract_source_coefficients(&self, quad: &VelocityQuadrature, term: &VelocityFunction) -> Result<[f64; 13]> {
        term.check(quad)?;
        let w = quad.weights();
        let mut out = [0.0; 13];
        for (k, d) in self.dual.iter().enumerate() {
            out[k] = (0..w.len()).map(|q| w[q] * term.values[q] * d.values[q]).sum();
        }
        Ok(out)
    }

    /// ζ_i = −e*_{v_i|v|²}.
    pub fn zeta_i(&self, i: usize) -> Vec<f64> {
        self.dual_of(MomentLabel::VEnergy(i)).values.iter().map(|x| -x).collect()
    }

    /// ζ_ij = −e*_{v_i v_j} off the diagonal, Σ_{k≠i} e*_{v_k²} − e*_{v_i²} on it.
    pub fn zeta_ij(&self, i: usize, j: usize) -> Vec<f64> {
        if i != j {
            let (p, q) = if i < j { (i, j) } else { (j, i) };
            return self.dual_of(MomentLabel::VV(p, q)).values.iter().map(|x| -x).collect();
        }
        let mut out: Vec<f64> = self.dual_of(MomentLabel::VSq(i)).values.iter().map(|x| -x).collect();
        for k in (0..3).filter(|&k| k != i) {
            out.iter_mut().zip(&self.dual_of(MomentLabel::VSq(k)).values).for_each(|(o, x)| *o += x);
        }
        out
    }
}
