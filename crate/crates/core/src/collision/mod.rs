//! Hard-sphere collision operators linearized at the global Maxwellian:
//! the self-adjoint L = ν + K, its spectral data and resolvents, and the
//! symmetric bilinear Q.

mod angular;
mod bilinear;
pub mod burnett;
mod cache;
mod linearized;

pub use angular::AngularRule;
pub use bilinear::{apply_q, micro_modes, micro_tensor, q_direct, BilinearOperator};
pub use cache::{load_operator, save_operator, CACHE_VERSION};
pub use linearized::{assemble_l, estimate_coercivity, burnett_blocks, invariant_basis, LinearizedOperator};
