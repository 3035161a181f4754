use crate::error::{Error, Result};
use crate::gauss;

/// Product Gauss–Legendre × trapezoid rule on the unit sphere.
///
/// With `order` Legendre nodes in cos θ and `2 * order` azimuthal nodes it
/// integrates spherical polynomials of degree ≤ 2·order − 1 exactly.
#[derive(Debug, Clone)]
pub struct AngularRule {
    order: usize,
    directions: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl AngularRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput(format!("angular order must be at least 2, got {order}")));
        }
        let polar = gauss::legendre(order)?;
        let azim = gauss::trapezoid_circle(2 * order);
        let mut directions = Vec::with_capacity(polar.len() * azim.len());
        let mut weights = Vec::with_capacity(polar.len() * azim.len());
        for (ct, wt) in polar.nodes.iter().zip(&polar.weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for (ph, wp) in azim.nodes.iter().zip(&azim.weights) {
                directions.push([st * ph.cos(), st * ph.sin(), *ct]);
                weights.push(wt * wp);
            }
        }
        Ok(Self { order, directions, weights })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Highest spherical-polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.directions.iter().zip(&self.weights).map(|(d, w)| w * f(*d)).sum()
    }
}

/// Orthonormal pair completing `a` (unit) to a right-handed frame.
pub(crate) fn frame(a: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let t = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = t[0] * a[0] + t[1] * a[1] + t[2] * a[2];
    let mut e1 = [t[0] - d * a[0], t[1] - d * a[1], t[2] - d * a[2]];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= n);
    let e2 = [a[1] * e1[2] - a[2] * e1[1], a[2] * e1[0] - a[0] * e1[2], a[0] * e1[1] - a[1] * e1[0]];
    (e1, e2)
}
