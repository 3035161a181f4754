use super::quadrature::{QuadKey, VelocityQuadrature};
use crate::error::{Error, Result};

/// Nodal values of a function of velocity on a given quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFunction {
    pub values: Vec<f64>,
    key: QuadKey,
}

impl VelocityFunction {
    pub fn new(quad: &VelocityQuadrature, values: Vec<f64>) -> Result<Self> {
        if values.len() != quad.len() {
            return Err(Error::Structure(format!(
                "{} values for a quadrature with {} nodes",
                values.len(),
                quad.len()
            )));
        }
        Ok(Self { values, key: quad.key() })
    }

    pub fn from_fn(quad: &VelocityQuadrature, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self { values: quad.sample(f), key: quad.key() }
    }

    pub(crate) fn from_parts(values: Vec<f64>, key: QuadKey) -> Self {
        Self { values, key }
    }

    pub fn key(&self) -> QuadKey {
        self.key
    }

    pub fn check(&self, quad: &VelocityQuadrature) -> Result<()> {
        if self.key != quad.key() {
            return Err(Error::Structure("velocity function belongs to a different quadrature".into()));
        }
        Ok(())
    }
}

/// Weight of the velocity inner product.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Unit,
    Nu(&'a VelocityFunction),
}

/// ⟨f, g⟩ in L²(M dv), optionally ν-weighted.
pub fn inner_product(
    quad: &VelocityQuadrature,
    f: &VelocityFunction,
    g: &VelocityFunction,
    weight: Weight<'_>,
) -> Result<f64> {
    f.check(quad)?;
    g.check(quad)?;
    let w = quad.weights();
    Ok(match weight {
        Weight::Unit => (0..w.len()).map(|k| w[k] * f.values[k] * g.values[k]).sum(),
        Weight::Nu(nu) => {
            nu.check(quad)?;
            (0..w.len()).map(|k| w[k] * nu.values[k] * f.values[k] * g.values[k]).sum()
        }
    })
}
