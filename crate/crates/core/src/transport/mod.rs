//! Viscosity and heat-conduction tensors A, B, their inverses Â = L⁻¹A and
//! B̂ = L⁻¹B on N^⊥, the transport coefficients μ and κ, and an independent
//! Sonine–Galerkin reference for both.

mod coefficients;
mod sonine;

pub use coefficients::{build_ab, compute_mu_kappa, solve_hat, TensorAB, TransportCoefficients};
pub use sonine::{sonine_oracle, SonineResult};
