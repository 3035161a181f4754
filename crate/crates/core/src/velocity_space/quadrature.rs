use crate::error::{Error, Result};
use crate::gauss;
use serde::{Deserialize, Serialize};

/// Identity of a quadrature, used to reject mixing functions from
/// different velocity grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadKey {
    pub nodes_per_axis: usize,
    pub scaling_bits: u64,
}

/// Tensor Gauss–Hermite quadrature for ∫ f M dv in three velocity dimensions.
///
/// Node index `(i * n + j) * n + k` holds velocity `(x_i, x_j, x_k)`.
#[derive(Debug, Clone)]
pub struct VelocityQuadrature {
    nodes_per_axis: usize,
    scaling: f64,
    axis_nodes: Vec<f64>,
    axis_weights: Vec<f64>,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

pub fn build_quadrature(nodes_per_axis: usize, scaling: f64) -> Result<VelocityQuadrature> {
    VelocityQuadrature::new(nodes_per_axis, scaling)
}

impl VelocityQuadrature {
    pub fn new(nodes_per_axis: usize, scaling: f64) -> Result<Self> {
        if nodes_per_axis < 4 {
            return Err(Error::InvalidInput(format!(
                "nodes_per_axis = {nodes_per_axis} cannot resolve the collision invariants; need at least 4"
            )));
        }
        if !(scaling > 0.0 && scaling.is_finite()) {
            return Err(Error::InvalidInput(format!("scaling must be positive, got {scaling}")));
        }
        let rule = gauss::hermite_probabilists(nodes_per_axis)?;
        let axis_nodes: Vec<f64> = rule.nodes.iter().map(|x| scaling * x).collect();
        let axis_weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * scaling * (-(scaling * scaling - 1.0) * x * x / 2.0).exp())
            .collect();
        let n = nodes_per_axis;
        let mut nodes = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    nodes.push([axis_nodes[i], axis_nodes[j], axis_nodes[k]]);
                    weights.push(axis_weights[i] * axis_weights[j] * axis_weights[k]);
                }
            }
        }
        Ok(Self { nodes_per_axis, scaling, axis_nodes, axis_weights, nodes, weights })
    }

    pub fn key(&self) -> QuadKey {
        QuadKey { nodes_per_axis: self.nodes_per_axis, scaling_bits: self.scaling.to_bits() }
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    /// Number of three-dimensional nodes.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    /// Largest node coordinate in absolute value.
    pub fn v_max(&self) -> f64 {
        self.axis_nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// ∫ f M dv by quadrature.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(v, w)| w * f(*v)).sum()
    }

    /// Nodal samples of a function of velocity.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|v| f(*v)).collect()
    }

    /// Node index of the mirror image -v.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.nodes_per_axis;
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        ((n - 1 - i) * n + (n - 1 - j)) * n + (n - 1 - k)
    }
}
