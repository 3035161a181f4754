//! Pseudospectral solver for the incompressible Navier–Stokes–Fourier
//! system coupled to Δ(ρ + θ) = γ²ρ, evolving (u, σ = 3θ/5 − 2ρ/5).

use crate::error::{Error, Result};
use crate::spatial_field::{gradient, leray_project, solve_poisson, ScalarField, SpatialGrid, VectorField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub mu: f64,
    pub kappa: f64,
    pub gamma: f64,
}

/// Evolved (u, σ) with derived ρ, θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub u: VectorField,
    pub sigma: ScalarField,
    pub rho: ScalarField,
    pub theta: ScalarField,
    pub time: f64,
    pub params: FluidParams,
}

/// ρ̂ = −|k|²σ̂/(|k|² + 3γ²/5), θ = (5σ + 2ρ)/3.
pub fn elliptic_rho_theta(sigma: &ScalarField, gamma: f64) -> (ScalarField, ScalarField) {
    let grid = sigma.grid().clone();
    let g2 = 0.6 * gamma * gamma;
    let rho = sigma.multiply(|i| {
        let k = grid.wavevector(i);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if kk == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-kk / (kk + g2), 0.0)
        }
    });
    let theta = sigma.scale(5.0 / 3.0).axpy(2.0 / 3.0, &rho);
    (rho, theta)
}

impl FluidState {
    pub fn new(u: VectorField, sigma: ScalarField, time: f64, params: FluidParams) -> Result<Self> {
        if u.len() != 3 || u.grid() != sigma.grid() {
            return Err(Error::Structure("fluid velocity must have three components on the σ grid".into()));
        }
        let (rho, theta) = elliptic_rho_theta(&sigma, params.gamma);
        Ok(Self { u, sigma, rho, theta, time, params })
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.sigma.grid()
    }

    /// ½‖u‖².
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.u.inner(&self.u)
    }

    /// ‖∇u‖².
    pub fn velocity_gradient_sq(&self) -> f64 {
        self.u.components.iter().map(|c| gradient(c).inner(&gradient(c))).sum()
    }

    /// d/dt ½‖u‖² = −μ‖∇u‖² + ⟨u, ρ∇θ⟩.
    pub fn energy_rate(&self) -> f64 {
        let gth = gradient(&self.theta);
        let work: f64 = (0..3).map(|i| self.u.components[i].inner(&self.rho.mul(&gth.components[i]))).sum();
        work - self.params.mu * self.velocity_gradient_sq()
    }

    /// ‖∇·u‖_∞.
    pub fn divergence_residual(&self) -> f64 {
        crate::spatial_field::divergence(&self.u).max_abs()
    }

    /// Largest residual of Δ(ρ + θ) = γ²ρ and σ = 3θ/5 − 2ρ/5.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let g2 = self.params.gamma * self.params.gamma;
        let s = self.rho.axpy(1.0, &self.theta);
        let ell = crate::spatial_field::laplacian(&s).axpy(-g2, &self.rho).max_abs();
        let sig = self.theta.scale(0.6).axpy(-0.4, &self.rho).axpy(-1.0, &self.sigma).max_abs();
        (ell, sig)
    }

    /// ‖∇(ρ + θ − γφ_f)‖ with Δφ_f = γρ.
    pub fn boussinesq_residual(&self) -> Result<f64> {
        let g = self.params.gamma;
        let phi = solve_poisson(&self.rho, g)?;
        let s = self.rho.axpy(1.0, &self.theta).axpy(-g, &phi);
        Ok(gradient(&s).l2_norm())
    }
}

/// |ΔE − Δt·(Ė₀ + Ė₁)/2| / E₀ for consecutive states, E = ½‖u‖².
pub fn energy_balance_residual(before: &FluidState, after: &FluidState) -> f64 {
    let dt = after.time - before.time;
    let e0 = before.kinetic_energy();
    let r = (after.kinetic_energy() - e0 - 0.5 * dt * (before.energy_rate() + after.energy_rate())).abs();
    if e0 > 0.0 {
        r / e0
    } else {
        r
    }
}

/// u = 𝒫u₀, σ = 3θ₀/5 − 2ρ₀/5, with ρ, θ re-derived from σ.
pub fn make_initial_from_limit(
    rho0: &ScalarField,
    u0: &VectorField,
    theta0: &ScalarField,
    params: FluidParams,
) -> Result<FluidState> {
    let sigma = theta0.scale(0.6).axpy(-0.4, rho0);
    FluidState::new(leray_project(u0), sigma, 0.0, params)
}

/// Integrating-factor SSP-RK3 stepper.
#[derive(Debug, Clone)]
pub struct FluidSolver {
    grid: SpatialGrid,
    params: FluidParams,
    kk: Vec<f64>,
    sigma_rate: Vec<f64>,
}

impl FluidSolver {
    pub fn new(grid: &SpatialGrid, params: FluidParams) -> Result<Self> {
        if !(params.mu >= 0.0 && params.kappa >= 0.0 && params.gamma >= 0.0) {
            return Err(Error::InvalidInput("μ, κ and γ must be non-negative".into()));
        }
        let g2 = params.gamma * params.gamma;
        let kk: Vec<f64> = (0..grid.len())
            .map(|i| {
                let k = grid.wavevector(i);
                k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
            })
            .collect();
        let sigma_rate = kk.iter().map(|&q| if q == 0.0 { 0.0 } else { params.kappa * q * (q + g2) / (q + 0.6 * g2) }).collect();
        Ok(Self { grid: grid.clone(), params, kk, sigma_rate })
    }

    /// Largest admissible step for the current velocity.
    pub fn max_dt(&self, state: &FluidState) -> f64 {
        let umax: f64 = state.u.components.iter().take(self.grid.dim()).map(|c| c.max_abs()).sum();
        if umax == 0.0 {
            f64::INFINITY
        } else {
            0.5 * self.grid.min_spacing() / umax
        }
    }

    fn decay_u(&self, f: &ScalarField, t: f64) -> ScalarField {
        f.multiply(|i| Complex64::new((-self.params.mu * self.kk[i] * t).exp(), 0.0))
    }

    fn decay_sigma(&self, f: &ScalarField, t: f64) -> ScalarField {
        f.multiply(|i| Complex64::new((-self.sigma_rate[i] * t).exp(), 0.0))
    }

    /// Nonlinear tendencies: −𝒫(u·∇u) + 𝒫(ρ∇θ) and −u·∇σ, dealiased.
    fn tendencies(&self, u: &VectorField, sigma: &ScalarField) -> (VectorField, ScalarField) {
        let (rho, theta) = elliptic_rho_theta(sigma, self.params.gamma);
        let gth = gradient(&theta);
        let adv = |f: &ScalarField| -> ScalarField {
            let gf = gradient(f);
            (0..3).fold(ScalarField::zeros(&self.grid), |acc, a| acc.axpy(1.0, &u.components[a].mul(&gf.components[a])))
        };
        let comps: Vec<ScalarField> =
            (0..3).map(|i| rho.mul(&gth.components[i]).axpy(-1.0, &adv(&u.components[i])).dealias()).collect();
        let nu = leray_project(&VectorField { components: comps });
        let ns = adv(sigma).dealias().scale(-1.0);
        (nu, ns)
    }

    fn map_u(&self, u: &VectorField, t: f64) -> VectorField {
        VectorField { components: u.components.iter().map(|c| self.decay_u(c, t)).collect() }
    }

    /// One integrating-factor SSP-RK3 step.
    pub fn nsfp_step(&self, state: &FluidState, dt: f64) -> Result<FluidState> {
        let max = self.max_dt(state);
        if !(dt > 0.0) || dt > max {
            return Err(Error::Cfl { dt, max });
        }
        let (u0, s0) = (&state.u, &state.sigma);
        let (nu0, ns0) = self.tendencies(u0, s0);
        let u1 = self.map_u(&u0.axpy(dt, &nu0), dt);
        let s1 = self.decay_sigma(&s0.axpy(dt, &ns0), dt);

        let (nu1, ns1) = self.tendencies(&u1, &s1);
        let u2 = self.map_u(u0, 0.5 * dt).scale(0.75).axpy(0.25, &self.map_u(&u1.axpy(dt, &nu1), -0.5 * dt));
        let s2 = self.decay_sigma(s0, 0.5 * dt).scale(0.75).axpy(0.25, &self.decay_sigma(&s1.axpy(dt, &ns1), -0.5 * dt));

        let (nu2, ns2) = self.tendencies(&u2, &s2);
        let u3 = self.map_u(u0, dt).scale(1.0 / 3.0).axpy(2.0 / 3.0, &self.map_u(&u2.axpy(dt, &nu2), 0.5 * dt));
        let s3 = self.decay_sigma(s0, dt).scale(1.0 / 3.0).axpy(2.0 / 3.0, &self.decay_sigma(&s2.axpy(dt, &ns2), 0.5 * dt));

        let u3 = leray_project(&u3);
        FluidState::new(u3, s3, state.time + dt, self.params)
    }
}
