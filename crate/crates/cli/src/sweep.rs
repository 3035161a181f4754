//! ε-sweeps against the NSFP limit.

use crate::config::SweepConfig;
use crate::init::{build_well_prepared, limit_fields};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use vpblimit_core::diagnostics::{energy_report, kinetic_flux_closure};
use vpblimit_core::fluid_solver::{make_initial_from_limit, FluidParams, FluidSolver, FluidState};
use vpblimit_core::kinetic_solver::{
    max_stable_dt, ConservationBaseline, KineticModel, KineticSolver, KineticState, SolverConfig, VelocityModel,
};
use vpblimit_core::macro_micro::{thirteen_basis, ThirteenMomentBasis};
use vpblimit_core::spatial_field::{
    divergence, gradient, leray_project, sobolev_norm, ScalarField, SpatialGrid, VectorField,
};
use vpblimit_core::transport::{build_ab, compute_mu_kappa, TransportCoefficients};
use vpblimit_core::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Diagnostics of one ε at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub epsilon: f64,
    pub t: f64,
    pub err_u: f64,
    pub err_sigma: f64,
    pub boussinesq: f64,
    pub incompressibility: f64,
    pub e_n: f64,
    pub d_n: f64,
    /// ‖(I − P)g‖²_{H^N_{x,v}(ν)}.
    pub micro_nu_sq: f64,
    pub e_int: f64,
    pub closure_rel_diff_a: f64,
    pub closure_rel_diff_b: f64,
    pub remainder_a: f64,
    pub remainder_b: f64,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub energy_drift: f64,
}

/// Sample-reduced quantities of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    pub err_u: f64,
    pub err_sigma: f64,
    pub boussinesq_residual: f64,
    pub incompressibility_residual: f64,
    pub dissipation_integral: f64,
    pub e_n0: f64,
    pub energy_ratio_sup: f64,
    pub closure_rel_diff_max: f64,
    pub remainder_a_sup: f64,
    pub remainder_b_sup: f64,
    /// (∫₀ᵀ ‖R‖² dt)^{1/2} by the trapezoid rule over samples.
    pub remainder_a_l2t: f64,
    pub remainder_b_l2t: f64,
    pub mass_drift_max: f64,
    pub momentum_drift_max: f64,
    pub energy_drift_max: f64,
    pub positivity_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub dt: f64,
    pub steps: usize,
    /// `None` when the run completed.
    pub failure: Option<String>,
    pub metrics: Option<RowMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub quantity: String,
    /// Least-squares slope of log(value) against log(ε); absent with fewer than two positive values.
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub schema_version: u32,
    pub mu: f64,
    pub kappa: f64,
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<Slope>,
    pub samples: Vec<SampleRow>,
}

impl ConvergenceTable {
    pub fn row(&self, epsilon: f64) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.epsilon == epsilon)
    }

    pub fn slope(&self, quantity: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.quantity == quantity).and_then(|s| s.slope)
    }
}

/// Metric names with fitted slopes, in table order.
pub const SLOPE_QUANTITIES: [&str; 10] = [
    "err_u",
    "err_sigma",
    "boussinesq_residual",
    "incompressibility_residual",
    "dissipation_integral",
    "energy_ratio_sup",
    "remainder_a_sup",
    "remainder_b_sup",
    "remainder_a_l2t",
    "remainder_b_l2t",
];

impl RowMetrics {
    pub fn get(&self, quantity: &str) -> Option<f64> {
        Some(match quantity {
            "err_u" => self.err_u,
            "err_sigma" => self.err_sigma,
            "boussinesq_residual" => self.boussinesq_residual,
            "incompressibility_residual" => self.incompressibility_residual,
            "dissipation_integral" => self.dissipation_integral,
            "energy_ratio_sup" => self.energy_ratio_sup,
            "remainder_a_sup" => self.remainder_a_sup,
            "remainder_b_sup" => self.remainder_b_sup,
            "remainder_a_l2t" => self.remainder_a_l2t,
            "remainder_b_l2t" => self.remainder_b_l2t,
            _ => return None,
        })
    }
}

/// Least-squares slope of log y against log x over points with x, y > 0.
pub fn loglog_slope(points: &[(f64, f64)]) -> (Option<f64>, usize) {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return (None, n);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (None, n);
    }
    (Some(sxy / sxx), n)
}

/// Number of equal steps no longer than `dt_max` covering `interval`.
pub fn steps_for(interval: f64, dt_max: f64) -> usize {
    ((interval / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Shared, ε-independent inputs of a sweep.
pub struct SweepContext {
    pub grid: SpatialGrid,
    pub velocity: Arc<VelocityModel>,
    pub transport: TransportCoefficients,
    pub basis: ThirteenMomentBasis,
    pub g0: ndarray::Array2<f64>,
    /// NSFP states at the sample times.
    pub reference: Vec<FluidState>,
}

fn vector_from(grid: &SpatialGrid, b: [Vec<f64>; 3]) -> Result<VectorField> {
    let [x, y, z] = b;
    VectorField::new(vec![ScalarField::new(grid, x)?, ScalarField::new(grid, y)?, ScalarField::new(grid, z)?])
}

/// NSFP trajectory sampled every `interval` up to `samples · interval`.
pub fn nsfp_reference(initial: FluidState, interval: f64, samples: usize, dt_max: f64) -> Result<Vec<FluidState>> {
    let solver = FluidSolver::new(initial.grid(), initial.params)?;
    let per = steps_for(interval, dt_max);
    let dt = interval / per as f64;
    let mut out = Vec::with_capacity(samples + 1);
    let mut s = initial;
    out.push(s.clone());
    for k in 1..=samples {
        for _ in 0..per {
            s = solver.nsfp_step(&s, dt)?;
        }
        s.time = k as f64 * interval;
        out.push(s.clone());
    }
    Ok(out)
}

impl SweepContext {
    pub fn build(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = SpatialGrid::cube(cfg.d, cfg.points_per_axis)?;
        let velocity = Arc::new(VelocityModel::build(cfg.nodes_per_axis, cfg.angular_order)?);
        Self::with_velocity(cfg, grid, velocity)
    }

    pub fn with_velocity(cfg: &SweepConfig, grid: SpatialGrid, velocity: Arc<VelocityModel>) -> Result<Self> {
        cfg.validate()?;
        let transport = compute_mu_kappa(&velocity.l, &velocity.quad, &build_ab(&velocity.quad))?;
        let basis = thirteen_basis(&velocity.quad)?;
        let (rho0, u0, theta0) = limit_fields(&grid, &cfg.init)?;
        let g0 = build_well_prepared(&rho0, &u0, &theta0, &velocity.quad)?;
        let params = FluidParams { mu: transport.mu, kappa: transport.kappa, gamma: cfg.gamma };
        let initial = make_initial_from_limit(&rho0, &u0, &theta0, params)?;
        let samples = (cfg.t_end / cfg.sample_interval).round() as usize;
        let reference = nsfp_reference(initial, cfg.sample_interval, samples, cfg.fluid_dt)?;
        Ok(Self { grid, velocity, transport, basis, g0, reference })
    }
}

struct Sampler<'a> {
    cfg: &'a SweepConfig,
    ctx: &'a SweepContext,
    base: ConservationBaseline,
}

impl Sampler<'_> {
    fn sample(&self, solver: &KineticSolver, state: &KineticState, reference: &FluidState) -> Result<SampleRow> {
        let model = solver.model();
        let grid = &model.grid;
        let m = model.macro_state(state);
        let b = vector_from(grid, m.u())?;
        let u_eps = leray_project(&b);
        let err_u = sobolev_norm(&u_eps.axpy(-1.0, &reference.u), self.cfg.n_cmp);
        let sigma = ScalarField::new(grid, m.sigma())?;
        let err_sigma = sobolev_norm(&sigma.axpy(-1.0, &reference.sigma), self.cfg.n_cmp);
        let rho = ScalarField::new(grid, m.rho())?;
        let theta = ScalarField::new(grid, m.theta())?;
        let bous = gradient(&rho.axpy(1.0, &theta).axpy(-model.gamma, &state.phi)).l2_norm();
        let incomp = divergence(&b).l2_norm();
        let cons = self.base.audit(model, state);
        let rep = energy_report(model, state, &self.ctx.basis, self.cfg.order, cons.clone())?;
        let dtg = solver.time_derivative(state.g.view());
        let cl = kinetic_flux_closure(solver, state, dtg.view(), &self.ctx.transport)?;
        Ok(SampleRow {
            epsilon: model.epsilon,
            t: state.time,
            err_u,
            err_sigma,
            boussinesq: bous,
            incompressibility: incomp,
            e_n: rep.e_n,
            d_n: rep.d_n_eps,
            micro_nu_sq: rep.micro_norm_hn_nu * rep.micro_norm_hn_nu,
            e_int: rep.e_int,
            closure_rel_diff_a: cl.rel_diff_a,
            closure_rel_diff_b: cl.rel_diff_b,
            remainder_a: cl.remainder_a,
            remainder_b: cl.remainder_b,
            mass_drift: cons.mass_drift,
            momentum_drift: cons.momentum_drift.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            energy_drift: cons.energy_drift,
        })
    }
}

/// Kinetic time step used for one ε: the largest step dividing the sample
/// interval that stays below `dt_fraction` of the CFL limit.
pub fn sweep_dt(cfg: &SweepConfig, model: &KineticModel) -> (f64, usize) {
    let per = steps_for(cfg.sample_interval, cfg.dt_fraction * max_stable_dt(model));
    (cfg.sample_interval / per as f64, per)
}

/// Result of one kinetic run of a sweep.
pub struct EpsilonRun {
    pub dt: f64,
    pub steps: usize,
    pub metrics: RowMetrics,
    pub samples: Vec<SampleRow>,
    pub model: KineticModel,
    /// State at t_end.
    pub state: KineticState,
}

/// Table plus the final kinetic states of the completed runs.
pub struct SweepOutcome {
    pub table: ConvergenceTable,
    pub finals: Vec<(KineticModel, KineticState)>,
}

/// One kinetic run and its samples.
pub fn run_epsilon(cfg: &SweepConfig, ctx: &SweepContext, epsilon: f64) -> Result<EpsilonRun> {
    let model = KineticModel::new(ctx.grid.clone(), ctx.velocity.clone(), epsilon, cfg.gamma)?;
    let (dt, per) = sweep_dt(cfg, &model);
    let scfg = SolverConfig { dt, scheme: cfg.scheme, collision: cfg.collision, ..SolverConfig::default() };
    let mut solver = KineticSolver::new(model.clone(), scfg)?;
    let mut state = model.state(ctx.g0.clone(), 0.0)?;
    let sampler = Sampler { cfg, ctx, base: ConservationBaseline::new(&model, &state) };
    let mut rows = vec![sampler.sample(&solver, &state, &ctx.reference[0])?];
    let mut violations = 0;
    for (k, reference) in ctx.reference.iter().enumerate().skip(1) {
        for _ in 0..per {
            state = solver.step(&state)?;
            violations += solver.last_info().positivity_violations;
        }
        state.time = k as f64 * cfg.sample_interval;
        rows.push(sampler.sample(&solver, &state, reference)?);
    }
    let sup = |f: fn(&SampleRow) -> f64| rows.iter().map(f).fold(0.0f64, f64::max);
    let e0 = rows[0].e_n;
    let trapezoid = |f: fn(&SampleRow) -> f64| -> f64 {
        rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]))).sum()
    };
    let dissipation = trapezoid(|r| r.micro_nu_sq);
    let metrics = RowMetrics {
        err_u: sup(|r| r.err_u),
        err_sigma: sup(|r| r.err_sigma),
        boussinesq_residual: sup(|r| r.boussinesq),
        incompressibility_residual: sup(|r| r.incompressibility),
        dissipation_integral: dissipation,
        e_n0: e0,
        energy_ratio_sup: if e0 > 0.0 { sup(|r| r.e_n) / e0 } else { 0.0 },
        closure_rel_diff_max: sup(|r| r.closure_rel_diff_a.max(r.closure_rel_diff_b)),
        remainder_a_sup: sup(|r| r.remainder_a),
        remainder_b_sup: sup(|r| r.remainder_b),
        remainder_a_l2t: trapezoid(|r| r.remainder_a * r.remainder_a).sqrt(),
        remainder_b_l2t: trapezoid(|r| r.remainder_b * r.remainder_b).sqrt(),
        mass_drift_max: sup(|r| r.mass_drift.abs()),
        momentum_drift_max: sup(|r| r.momentum_drift),
        energy_drift_max: sup(|r| r.energy_drift.abs()),
        positivity_violations: violations,
    };
    let steps = per * (ctx.reference.len() - 1);
    Ok(EpsilonRun { dt, steps, metrics, samples: rows, model, state })
}

/// Runs every ε of the sweep (concurrently) and assembles the table in
/// decreasing-ε order. A failing run marks its row and the sweep continues.
pub fn run_sweep_with(cfg: &SweepConfig, ctx: &SweepContext) -> Result<SweepOutcome> {
    let eps = cfg.validate()?;
    let probe = KineticModel::new(ctx.grid.clone(), ctx.velocity.clone(), eps[0], cfg.gamma)?;
    let e0 = vpblimit_core::diagnostics::energy_e_n(&probe, &probe.state(ctx.g0.clone(), 0.0)?, cfg.order)?;
    if e0 > cfg.energy_threshold {
        return Err(Error::InvalidInput(format!(
            "initial energy E_N(0) = {e0:.4e} exceeds the smallness threshold {:.4e}",
            cfg.energy_threshold
        )));
    }
    let results: Vec<(f64, Result<EpsilonRun>)> =
        eps.par_iter().map(|&e| (e, run_epsilon(cfg, ctx, e))).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut samples = Vec::new();
    let mut finals = Vec::new();
    for (e, res) in results {
        match res {
            Ok(run) => {
                rows.push(ConvergenceRow {
                    epsilon: e,
                    dt: run.dt,
                    steps: run.steps,
                    failure: None,
                    metrics: Some(run.metrics),
                });
                samples.extend(run.samples);
                finals.push((run.model, run.state));
            }
            Err(err) => {
                let probe = KineticModel::new(ctx.grid.clone(), ctx.velocity.clone(), e, cfg.gamma)?;
                let (dt, per) = sweep_dt(cfg, &probe);
                rows.push(ConvergenceRow {
                    epsilon: e,
                    dt,
                    steps: per * (ctx.reference.len() - 1),
                    failure: Some(err.to_string()),
                    metrics: None,
                });
            }
        }
    }
    let slopes = SLOPE_QUANTITIES
        .iter()
        .map(|q| {
            let pts: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| r.metrics.as_ref().and_then(|m| m.get(q)).map(|v| (r.epsilon, v))).collect();
            let (slope, points) = loglog_slope(&pts);
            Slope { quantity: q.to_string(), slope, points }
        })
        .collect();
    let table = ConvergenceTable {
        schema_version: SCHEMA_VERSION,
        mu: ctx.transport.mu,
        kappa: ctx.transport.kappa,
        rows,
        slopes,
        samples,
    };
    Ok(SweepOutcome { table, finals })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<ConvergenceTable> {
    let ctx = SweepContext::build(cfg)?;
    Ok(run_sweep_with(cfg, &ctx)?.table)
}
