//! Kinetic–fluid toolkit for the scaled Vlasov–Poisson–Boltzmann system near
//! a global Maxwellian and its incompressible Navier–Stokes–Fourier–Poisson
//! limit on periodic domains.

pub mod error;
pub mod collision;
pub mod diagnostics;
pub mod fluid_solver;
pub mod gauss;
pub mod kinetic_solver;
pub mod linalg;
pub mod macro_micro;
pub mod spatial_field;
pub mod transport;
pub mod velocity_space;

pub use error::{Error, Result};
