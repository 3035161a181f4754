//! Energy functionals E_N, D_N and E_int, micro and fluid norms, and the
//! kinetic flux closures with their explicit remainders.

mod closure;
mod energy;

pub use closure::{finite_difference_derivative, kinetic_flux_closure, ClosureRecord};
pub use energy::{
    dissipation_d_n, energy_e_n, energy_report, interactive_energy, micro_norm_sq, EnergyReport, Norms, DEFAULT_ORDER,
};
