//! Time integration of the scaled perturbation system: spectral transport
//! with the self-consistent field, the stiff collision part through the
//! eigen-factorization of L, Picard iteration, and conservation and
//! balance-law audits.

mod audit;
mod model;
mod solver;
mod streaming;

pub use audit::{balance_residuals, BalanceRecord, ConservationBaseline, ConservationRecord};
pub use streaming::Parts;
pub use model::{KineticModel, KineticState, VelocityModel};
pub use solver::{max_stable_dt, CollisionStep, KineticSolver, PositivityPolicy, Scheme, SolverConfig, StepInfo, CFL_SAFETY};
