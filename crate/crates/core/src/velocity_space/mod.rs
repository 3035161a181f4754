//! Velocity discretization of L²(M dv): tensor Gauss–Hermite nodes, the
//! orthonormal Hermite basis, weighted inner products, v-derivatives and the
//! hard-sphere collision frequency.

mod frequency;
mod function;
mod hermite;
mod quadrature;

pub use frequency::{collision_frequency, collision_frequency_at};
pub use function::{inner_product, VelocityFunction, Weight};
pub use hermite::{AxisOp, HermiteBasis};
pub use quadrature::{build_quadrature, QuadKey, VelocityQuadrature};
