//! Hydrodynamic projection P onto the collision invariants, the micro part
//! (I − P)g, the thirteen-moment basis with its biorthogonal dual, and the
//! moment fluxes used by the balance laws.

mod projection;
mod thirteen;

pub use projection::{micro_flux, project_p, MacroPoint, MacroState, Projector};
pub use thirteen::{thirteen_basis, MomentLabel, ThirteenMomentBasis};
