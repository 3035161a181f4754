use super::model::{KineticModel, KineticState};
use crate::error::Result;
use crate::macro_micro::micro_flux;
use crate::spatial_field::{divergence, field_energy, gradient, laplacian, ScalarField, VectorField};
use crate::velocity_space::VelocityFunction;
use serde::{Deserialize, Serialize};

/// Relative drifts of the full-f conserved quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass_drift: f64,
    pub momentum_drift: [f64; 3],
    pub energy_drift: f64,
    /// ∫∫|v|²F.
    pub kinetic_energy: f64,
    /// ε²∫|∇φ|².
    pub field_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Totals {
    mass: f64,
    momentum: [f64; 3],
    kinetic: f64,
    field: f64,
    speed: f64,
}

/// Initial values of mass, momentum and energy of F = M(1 + εg).
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationBaseline {
    initial: Totals,
}

fn totals(model: &KineticModel, state: &KineticState) -> Totals {
    let quad = model.quad();
    let cv = model.grid.cell_volume();
    let vol = model.grid.volume();
    let eps = model.epsilon;
    let (mut m0, mut m1, mut m2, mut ms) = (0.0, [0.0; 3], 0.0, 0.0);
    let (mut base2, mut bases) = (0.0, 0.0);
    for (v, w) in quad.nodes().iter().zip(quad.weights()) {
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        base2 += w * s2;
        bases += w * s2.sqrt();
    }
    for row in state.g.outer_iter() {
        for ((v, w), x) in quad.nodes().iter().zip(quad.weights()).zip(row.iter()) {
            let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let wx = w * x;
            m0 += wx;
            for i in 0..3 {
                m1[i] += wx * v[i];
            }
            m2 += wx * s2;
            ms += wx * s2.sqrt();
        }
    }
    Totals {
        mass: vol + eps * cv * m0,
        momentum: m1.map(|x| eps * cv * x),
        kinetic: vol * base2 + eps * cv * m2,
        field: eps * eps * field_energy(&state.phi),
        speed: vol * bases + eps * cv * ms,
    }
}

impl ConservationBaseline {
    pub fn new(model: &KineticModel, initial: &KineticState) -> Self {
        Self { initial: totals(model, initial) }
    }

    pub fn audit(&self, model: &KineticModel, state: &KineticState) -> ConservationRecord {
        let now = totals(model, state);
        let i = &self.initial;
        let e0 = i.kinetic + i.field;
        ConservationRecord {
            t: state.time,
            mass_drift: (now.mass - i.mass) / i.mass,
            momentum_drift: [0, 1, 2].map(|k| (now.momentum[k] - i.momentum[k]) / i.speed),
            energy_drift: (now.kinetic + now.field - e0) / e0,
            kinetic_energy: now.kinetic,
            field_energy: now.field,
        }
    }
}

/// L²_x residuals of the local balance laws between two consecutive states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub t: f64,
    pub charge: f64,
    pub momentum: f64,
    pub energy: f64,
    pub poisson: f64,
}

struct Fluxes {
    rho: ScalarField,
    b: VectorField,
    e2: ScalarField,
    stress: Vec<VectorField>,
    heat: VectorField,
    phi: ScalarField,
}

fn fluxes(model: &KineticModel, state: &KineticState) -> Result<Fluxes> {
    let grid = &model.grid;
    let vm = &model.velocity;
    let ms = model.macro_state(state);
    let micro = vm.projector.micro(state.g.view());
    let n = grid.len();
    let mut stress = vec![vec![vec![0.0; n]; 3]; 3];
    let mut heat = vec![vec![0.0; n]; 3];
    for (x, row) in micro.outer_iter().enumerate() {
        let f = VelocityFunction::new(&vm.quad, row.to_vec())?;
        let (t, q) = micro_flux(&vm.quad, &f)?;
        for i in 0..3 {
            for j in 0..3 {
                stress[i][j][x] = t[i][j];
            }
            heat[i][x] = q[i];
        }
    }
    let sf = |v: Vec<f64>| ScalarField::new(grid, v);
    let vf = |v: Vec<Vec<f64>>| -> Result<VectorField> { VectorField::new(v.into_iter().map(sf).collect::<Result<Vec<_>>>()?) };
    let e2: Vec<f64> = ms.a.iter().zip(&ms.c).map(|(a, c)| 3.0 * a + 15.0 * c).collect();
    Ok(Fluxes {
        rho: sf(ms.rho())?,
        b: vf(ms.b.to_vec())?,
        e2: sf(e2)?,
        stress: stress.into_iter().map(vf).collect::<Result<Vec<_>>>()?,
        heat: vf(heat)?,
        phi: state.phi.clone(),
    })
}

/// Residuals of the charge, momentum and energy balance laws, with the time
/// derivative by the difference of the two states and the flux terms averaged
/// (centered at the midpoint), plus the Poisson residual of `after`.
pub fn balance_residuals(model: &KineticModel, before: &KineticState, after: &KineticState) -> Result<BalanceRecord> {
    let dt = after.time - before.time;
    let f0 = fluxes(model, before)?;
    let f1 = fluxes(model, after)?;
    let eps = model.epsilon;
    let gamma = model.gamma;
    let grid = &model.grid;
    let ddt = |a: &ScalarField, b: &ScalarField| b.axpy(-1.0, a).scale(1.0 / dt);
    let avg = |a: &ScalarField, b: &ScalarField| a.axpy(1.0, b).scale(0.5);

    let div_b = |f: &Fluxes| divergence(&f.b);
    let charge = ddt(&f0.rho, &f1.rho).axpy(1.0 / eps, &avg(&div_b(&f0), &div_b(&f1)));

    let mom_flux = |f: &Fluxes, i: usize| -> ScalarField {
        let p = f.rho.axpy(2.0, &ScalarField::new(grid, f.e2.values().iter().zip(f.rho.values()).map(|(e, r)| (e - 3.0 * r) / 6.0).collect()).expect("grid"));
        let grad_phi = f.phi.derivative(i);
        p.derivative(i)
            .axpy(1.0, &divergence(&VectorField { components: f.stress[i].components.clone() }))
            .scale(1.0 / eps)
            .axpy(-gamma / eps, &grad_phi)
            .axpy(-gamma, &grad_phi.mul(&f.rho))
    };
    let mut momentum = 0.0;
    for i in 0..3 {
        let b0 = &f0.b.components[i];
        let b1 = &f1.b.components[i];
        let r = ddt(b0, b1).axpy(1.0, &avg(&mom_flux(&f0, i), &mom_flux(&f1, i)));
        momentum += r.inner(&r);
    }

    let en_flux = |f: &Fluxes| -> ScalarField {
        let total = VectorField { components: (0..3).map(|i| f.b.components[i].scale(5.0).axpy(1.0, &f.heat.components[i])).collect() };
        let gp = gradient(&f.phi);
        let work = (0..3).fold(ScalarField::zeros(grid), |acc, i| acc.axpy(1.0, &gp.components[i].mul(&f.b.components[i])));
        divergence(&total).scale(1.0 / eps).axpy(-2.0 * gamma, &work)
    };
    let energy = ddt(&f0.e2, &f1.e2).axpy(1.0, &avg(&en_flux(&f0), &en_flux(&f1)));

    let poisson = laplacian(&f1.phi).axpy(-gamma, &f1.rho);
    Ok(BalanceRecord {
        t: 0.5 * (before.time + after.time),
        charge: charge.l2_norm(),
        momentum: momentum.sqrt(),
        energy: energy.l2_norm(),
        poisson: poisson.l2_norm(),
    })
}
