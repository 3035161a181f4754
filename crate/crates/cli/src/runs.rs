//! Drivers behind the subcommands other than `converge`.

use crate::config::{CheckConfig, FluidConfig, RelaxConfig, RunConfig, TransportConfig};
use crate::emit::{Cell, Table};
use crate::init::{initial_state, limit_fields, state_from_snapshot, state_snapshot};
use crate::sweep::{loglog_slope, steps_for, Slope};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use vpblimit_core::collision::{assemble_l, AngularRule};
use vpblimit_core::diagnostics::{energy_e_n, energy_report, kinetic_flux_closure};
use vpblimit_core::fluid_solver::{energy_balance_residual, make_initial_from_limit, FluidParams, FluidSolver, FluidState};
use vpblimit_core::kinetic_solver::{
    balance_residuals, max_stable_dt, ConservationBaseline, KineticModel, KineticSolver, SolverConfig, VelocityModel,
};
use vpblimit_core::macro_micro::thirteen_basis;
use vpblimit_core::spatial_field::{sobolev_norm, Snapshot, SpatialGrid};
use vpblimit_core::transport::{build_ab, compute_mu_kappa, sonine_oracle};
use vpblimit_core::velocity_space::VelocityQuadrature;
use vpblimit_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportRecord {
    pub resolution: usize,
    pub angular_order: usize,
    pub mu: f64,
    pub kappa: f64,
    /// Relative residuals of the A- and B-hat solves.
    pub residuals: [f64; 2],
    pub oracle_mu: f64,
    pub oracle_kappa: f64,
    /// |μ/μ_oracle − 1| and |κ/κ_oracle − 1|.
    pub rel_err: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub sonine_order: usize,
    pub records: Vec<TransportRecord>,
    /// Relative change of (μ, κ) between the first and last resolution.
    pub refinement_change: Option<[f64; 2]>,
}

pub fn run_transport(cfg: &TransportConfig) -> Result<TransportReport> {
    if cfg.nodes_per_axis.is_empty() {
        return Err(Error::InvalidInput("nodes_per_axis must list at least one resolution".into()));
    }
    let oracle = sonine_oracle(cfg.sonine_order)?;
    let rule = AngularRule::new(cfg.angular_order)?;
    let mut records = Vec::new();
    for &n in &cfg.nodes_per_axis {
        let quad = VelocityQuadrature::new(n, 1.0)?;
        let l = assemble_l(&quad, &rule)?;
        let tc = compute_mu_kappa(&l, &quad, &build_ab(&quad))?;
        records.push(TransportRecord {
            resolution: n,
            angular_order: cfg.angular_order,
            mu: tc.mu,
            kappa: tc.kappa,
            residuals: [tc.residual_a, tc.residual_b],
            oracle_mu: oracle.mu,
            oracle_kappa: oracle.kappa,
            rel_err: [(tc.mu / oracle.mu - 1.0).abs(), (tc.kappa / oracle.kappa - 1.0).abs()],
        });
    }
    let refinement_change = (records.len() > 1).then(|| {
        let (a, b) = (&records[0], &records[records.len() - 1]);
        [(b.mu / a.mu - 1.0).abs(), (b.kappa / a.kappa - 1.0).abs()]
    });
    Ok(TransportReport { sonine_order: cfg.sonine_order, records, refinement_change })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxReport {
    pub lambda: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_rel_err: f64,
    pub final_rel_err: f64,
}

/// Homogeneous linearized relaxation of an eigenfunction e of L: the
/// amplitude ⟨g(t), e⟩ is compared with e^{−λt/ε²}.
pub fn run_relax(cfg: &RelaxConfig) -> Result<(RelaxReport, Table)> {
    let vm = Arc::new(VelocityModel::build(cfg.nodes_per_axis, cfg.angular_order)?);
    let lam = *vm.l.eigenvalues().get(cfg.mode).ok_or_else(|| Error::InvalidInput(format!("mode {} out of range", cfg.mode)))?;
    if lam <= vm.l.tol_null() {
        return Err(Error::InvalidInput(format!("mode {} lies in the null space of L", cfg.mode)));
    }
    if cfg.steps_per_efold == 0 || !(cfg.efolds > 0.0) {
        return Err(Error::InvalidInput("steps_per_efold and efolds must be positive".into()));
    }
    let grid = SpatialGrid::cube(1, 2)?;
    let model = KineticModel::new(grid.clone(), vm.clone(), cfg.epsilon, 1.0)?;
    let eps2 = cfg.epsilon * cfg.epsilon;
    let dt = eps2 / (lam * cfg.steps_per_efold as f64);
    let steps = (cfg.efolds * cfg.steps_per_efold as f64).round() as usize;
    let scfg = SolverConfig { dt, collision: cfg.collision, linearized_mode: true, ..SolverConfig::default() };
    let mut solver = KineticSolver::new(model.clone(), scfg)?;
    let e = vm.l.eigenfunction(cfg.mode);
    let w = vm.quad.weights();
    let g0 = Array2::from_shape_fn((grid.len(), e.len()), |(_, j)| e[j]);
    let mut state = model.state(g0, 0.0)?;
    let amp = |g: &Array2<f64>| -> f64 { g.row(0).iter().zip(&e).zip(w).map(|((a, b), w)| a * b * w).sum() };
    let a0 = amp(&state.g);
    let mut table = Table::new(&["t", "amplitude", "exact", "rel_err"]);
    let (mut max_err, mut last) = (0.0f64, 0.0);
    for k in 0..=steps {
        if k > 0 {
            state = solver.step(&state)?;
        }
        let t = k as f64 * dt;
        let exact = (-lam * t / eps2).exp();
        let a = amp(&state.g) / a0;
        let err = (a / exact - 1.0).abs();
        max_err = max_err.max(err);
        last = err;
        table.push(vec![t.into(), a.into(), exact.into(), err.into()])?;
    }
    Ok((RelaxReport { lambda: lam, dt, steps, max_rel_err: max_err, final_rel_err: last }, table))
}

pub const RUN_COLUMNS: [&str; 15] = [
    "t",
    "mass_drift",
    "momentum_drift_x",
    "momentum_drift_y",
    "momentum_drift_z",
    "energy_drift",
    "E_N",
    "D_N",
    "E_int",
    "micro_norm",
    "charge_residual",
    "momentum_residual",
    "energy_residual",
    "poisson_residual",
    "min_positivity",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub max_mass_drift: f64,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
    pub positivity_violations: usize,
    pub max_picard_iterations: usize,
    pub snapshots: Vec<PathBuf>,
}

fn resolve(out: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

/// One kinetic simulation; CSV rows every `audit_every` steps and at t_end.
pub fn run_kinetic(cfg: &RunConfig, config_dir: &Path, out: &Path) -> Result<(RunSummary, Table)> {
    if cfg.audit_every == 0 || !(cfg.t_end > 0.0) {
        return Err(Error::InvalidInput("audit_every and t_end must be positive".into()));
    }
    let grid = SpatialGrid::cube(cfg.d, cfg.points_per_axis)?;
    let vm = Arc::new(VelocityModel::build(cfg.nodes_per_axis, cfg.angular_order)?);
    let model = KineticModel::new(grid, vm.clone(), cfg.epsilon, cfg.gamma)?;
    let dt_max = max_stable_dt(&model);
    let steps = steps_for(cfg.t_end, cfg.dt.unwrap_or(dt_max));
    let dt = cfg.t_end / steps as f64;
    if let Some(req) = cfg.dt {
        if req > dt_max {
            return Err(Error::Cfl { dt: req, max: dt_max });
        }
    }
    let scfg = SolverConfig {
        dt,
        scheme: cfg.scheme,
        collision: cfg.collision,
        picard_tol: cfg.picard_tol,
        picard_max_iters: cfg.picard_max_iters,
        linearized_mode: cfg.linearized_mode,
        audit_every: cfg.audit_every,
        positivity: cfg.positivity,
    };
    let mut solver = KineticSolver::new(model.clone(), scfg)?;
    let mut state = initial_state(&model, &cfg.init, config_dir)?;
    let base = ConservationBaseline::new(&model, &state);
    let basis = thirteen_basis(&vm.quad)?;
    let snap_dir = cfg.output.snapshot_path.as_ref().map(|p| resolve(out, p));
    if let Some(dir) = &snap_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    }
    let mut summary = RunSummary {
        dt,
        steps,
        t_final: state.time,
        max_mass_drift: 0.0,
        max_momentum_drift: 0.0,
        max_energy_drift: 0.0,
        positivity_violations: 0,
        max_picard_iterations: 0,
        snapshots: Vec::new(),
    };
    let mut table = Table::new(&RUN_COLUMNS);
    let mut min_pos = f64::INFINITY;
    let save = |k: usize, st: &vpblimit_core::kinetic_solver::KineticState, summary: &mut RunSummary| -> Result<()> {
        if let Some(dir) = &snap_dir {
            let path = dir.join(format!("snap_{k:06}.vpbs"));
            state_snapshot(&model, st)?.save(&path)?;
            summary.snapshots.push(path);
        }
        Ok(())
    };
    let every = cfg.output.snapshot_every;
    save(0, &state, &mut summary)?;
    let row = |st: &vpblimit_core::kinetic_solver::KineticState,
                   prev: Option<&vpblimit_core::kinetic_solver::KineticState>,
                   min_pos: f64,
                   summary: &mut RunSummary,
                   table: &mut Table|
     -> Result<()> {
        let c = base.audit(&model, st);
        let rep = energy_report(&model, st, &basis, cfg.diagnostics_order, c.clone())?;
        let bal = prev.map(|p| balance_residuals(&model, p, st)).transpose()?;
        summary.max_mass_drift = summary.max_mass_drift.max(c.mass_drift.abs());
        summary.max_momentum_drift = c.momentum_drift.iter().fold(summary.max_momentum_drift, |m, x| m.max(x.abs()));
        summary.max_energy_drift = summary.max_energy_drift.max(c.energy_drift.abs());
        table.push(vec![
            st.time.into(),
            c.mass_drift.into(),
            c.momentum_drift[0].into(),
            c.momentum_drift[1].into(),
            c.momentum_drift[2].into(),
            c.energy_drift.into(),
            rep.e_n.into(),
            rep.d_n_eps.into(),
            rep.e_int.into(),
            rep.micro_norm_hn.into(),
            bal.as_ref().map(|b| b.charge).into(),
            bal.as_ref().map(|b| b.momentum).into(),
            bal.as_ref().map(|b| b.energy).into(),
            bal.as_ref().map(|b| b.poisson).into(),
            (min_pos.is_finite().then_some(min_pos)).into(),
        ])
    };
    row(&state, None, min_pos, &mut summary, &mut table)?;
    for k in 1..=steps {
        let next = solver.step(&state)?;
        let info = solver.last_info();
        summary.positivity_violations += info.positivity_violations;
        summary.max_picard_iterations = summary.max_picard_iterations.max(info.picard_increments.len());
        min_pos = min_pos.min(info.min_positivity);
        if k % cfg.audit_every == 0 || k == steps {
            row(&next, Some(&state), min_pos, &mut summary, &mut table)?;
        }
        if (every > 0 && k % every == 0) || k == steps {
            save(k, &next, &mut summary)?;
        }
        state = next;
    }
    summary.t_final = state.time;
    Ok((summary, table))
}

pub const FLUID_COLUMNS: [&str; 10] = [
    "t",
    "kinetic_energy",
    "velocity_gradient_sq",
    "energy_balance_residual",
    "divergence_residual",
    "elliptic_residual",
    "sigma_residual",
    "boussinesq_residual",
    "u_l2",
    "sigma_l2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidSummary {
    pub mu: f64,
    pub kappa: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_energy_balance_residual: f64,
    pub max_elliptic_residual: f64,
    pub max_divergence_residual: f64,
}

/// μ and κ on a velocity grid (Burnett assembly of L only).
pub fn transport_coefficients(nodes: usize, angular_order: usize) -> Result<(f64, f64)> {
    let quad = VelocityQuadrature::new(nodes, 1.0)?;
    let l = assemble_l(&quad, &AngularRule::new(angular_order)?)?;
    let tc = compute_mu_kappa(&l, &quad, &build_ab(&quad))?;
    Ok((tc.mu, tc.kappa))
}

pub fn run_fluid(cfg: &FluidConfig) -> Result<(FluidSummary, Table)> {
    if !(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || cfg.sample_every == 0 {
        return Err(Error::InvalidInput("dt, t_end and sample_every must be positive".into()));
    }
    let (mu, kappa) = match (cfg.mu, cfg.kappa) {
        (Some(m), Some(k)) => (m, k),
        _ => {
            let (m, k) = transport_coefficients(cfg.nodes_per_axis, cfg.angular_order)?;
            (cfg.mu.unwrap_or(m), cfg.kappa.unwrap_or(k))
        }
    };
    let params = FluidParams { mu, kappa, gamma: cfg.gamma };
    let grid = SpatialGrid::cube(cfg.d, cfg.points_per_axis)?;
    let (rho0, u0, theta0) = limit_fields(&grid, &cfg.init)?;
    let mut state = make_initial_from_limit(&rho0, &u0, &theta0, params)?;
    let solver = FluidSolver::new(&grid, params)?;
    let steps = steps_for(cfg.t_end, cfg.dt);
    let dt = cfg.t_end / steps as f64;
    let mut summary = FluidSummary {
        mu,
        kappa,
        dt,
        steps,
        max_energy_balance_residual: 0.0,
        max_elliptic_residual: 0.0,
        max_divergence_residual: 0.0,
    };
    let mut table = Table::new(&FLUID_COLUMNS);
    let push = |s: &FluidState, bal: Option<f64>, table: &mut Table| -> Result<()> {
        let (ell, sig) = s.constraint_residuals();
        table.push(vec![
            s.time.into(),
            s.kinetic_energy().into(),
            s.velocity_gradient_sq().into(),
            bal.into(),
            s.divergence_residual().into(),
            ell.into(),
            sig.into(),
            s.boussinesq_residual()?.into(),
            sobolev_norm(&s.u, 0).into(),
            s.sigma.l2_norm().into(),
        ])
    };
    push(&state, None, &mut table)?;
    for k in 1..=steps {
        let next = solver.nsfp_step(&state, dt)?;
        let bal = energy_balance_residual(&state, &next);
        let (ell, _) = next.constraint_residuals();
        summary.max_energy_balance_residual = summary.max_energy_balance_residual.max(bal);
        summary.max_elliptic_residual = summary.max_elliptic_residual.max(ell);
        summary.max_divergence_residual = summary.max_divergence_residual.max(next.divergence_residual());
        if k % cfg.sample_every == 0 || k == steps {
            push(&next, Some(bal), &mut table)?;
        }
        state = next;
    }
    Ok((summary, table))
}

pub const CHECK_COLUMNS: [&str; 16] = [
    "file",
    "epsilon",
    "t",
    "E_N",
    "D_N",
    "E_int",
    "e_int_ratio",
    "micro_norm_hn",
    "micro_norm_hn_nu",
    "fluid_grad_norm",
    "charge_norm",
    "energy_drift",
    "closure_rel_diff_a",
    "closure_rel_diff_b",
    "remainder_a",
    "remainder_b",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    pub snapshots: usize,
    /// sup E_N / E_N at the earliest snapshot.
    pub energy_constant: f64,
    /// sup ‖(I − P)g‖²_{H^N(ν)} / ε².
    pub dissipation_constant: f64,
    pub closure_rel_diff_max: f64,
    pub remainder_a_sup: f64,
    pub remainder_b_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub order: usize,
    pub per_epsilon: Vec<EpsilonSummary>,
    pub slopes: Vec<Slope>,
}

struct Loaded {
    path: PathBuf,
    model: KineticModel,
    state: vpblimit_core::kinetic_solver::KineticState,
}

/// EnergyReport rows and closure residuals for stored snapshots.
pub fn run_check(cfg: &CheckConfig, config_dir: &Path) -> Result<(CheckSummary, Table)> {
    if cfg.snapshots.is_empty() {
        return Err(Error::InvalidInput("no snapshots listed".into()));
    }
    let mut velocity: BTreeMap<usize, Arc<VelocityModel>> = BTreeMap::new();
    let mut loaded = Vec::new();
    for p in &cfg.snapshots {
        let path = resolve(config_dir, p);
        let snap = Snapshot::load(&path)?;
        let h = &snap.header;
        if h.scaling != 1.0 {
            return Err(Error::Format { path, reason: "only unit velocity scaling is supported".into() });
        }
        let vm = match velocity.get(&h.nodes_per_axis) {
            Some(v) => v.clone(),
            None => {
                let v = Arc::new(VelocityModel::build(h.nodes_per_axis, cfg.angular_order)?);
                velocity.insert(h.nodes_per_axis, v.clone());
                v
            }
        };
        let grid = SpatialGrid::new(h.d, h.points_per_axis, h.lengths.clone())?;
        let model = KineticModel::new(grid, vm, h.epsilon, h.gamma)?;
        let state = state_from_snapshot(&model, &snap, &path)?;
        loaded.push(Loaded { path, model, state });
    }
    loaded.sort_by(|a, b| b.model.epsilon.total_cmp(&a.model.epsilon).then(a.state.time.total_cmp(&b.state.time)));
    let mut transport = BTreeMap::new();
    let mut table = Table::new(&CHECK_COLUMNS);
    let mut per_epsilon: Vec<EpsilonSummary> = Vec::new();
    let mut baseline: Option<(f64, ConservationBaseline, f64)> = None;
    for item in &loaded {
        let (model, state) = (&item.model, &item.state);
        let vm = &model.velocity;
        let n = vm.quad.nodes_per_axis();
        if !transport.contains_key(&n) {
            transport.insert(n, compute_mu_kappa(&vm.l, &vm.quad, &build_ab(&vm.quad))?);
        }
        let tc = &transport[&n];
        let basis = thirteen_basis(&vm.quad)?;
        let eps = model.epsilon;
        if baseline.as_ref().map_or(true, |b| b.0 != eps) {
            let e0 = energy_e_n(model, state, cfg.order)?;
            baseline = Some((eps, ConservationBaseline::new(model, state), e0));
            per_epsilon.push(EpsilonSummary {
                epsilon: eps,
                snapshots: 0,
                energy_constant: 0.0,
                dissipation_constant: 0.0,
                closure_rel_diff_max: 0.0,
                remainder_a_sup: 0.0,
                remainder_b_sup: 0.0,
            });
        }
        let (_, base, e0) = baseline.as_ref().expect("baseline set");
        let rep = energy_report(model, state, &basis, cfg.order, base.audit(model, state))?;
        let solver = KineticSolver::new(model.clone(), SolverConfig { dt: max_stable_dt(model), ..SolverConfig::default() })?;
        let dtg = solver.time_derivative(state.g.view());
        let cl = kinetic_flux_closure(&solver, state, dtg.view(), tc)?;
        let s = per_epsilon.last_mut().expect("summary pushed");
        s.snapshots += 1;
        s.energy_constant = s.energy_constant.max(if *e0 > 0.0 { rep.e_n / e0 } else { 0.0 });
        s.dissipation_constant = s.dissipation_constant.max(rep.micro_norm_hn_nu.powi(2) / (eps * eps));
        s.closure_rel_diff_max = s.closure_rel_diff_max.max(cl.rel_diff_a).max(cl.rel_diff_b);
        s.remainder_a_sup = s.remainder_a_sup.max(cl.remainder_a);
        s.remainder_b_sup = s.remainder_b_sup.max(cl.remainder_b);
        table.push(vec![
            Cell::Text(item.path.display().to_string()),
            eps.into(),
            state.time.into(),
            rep.e_n.into(),
            rep.d_n_eps.into(),
            rep.e_int.into(),
            rep.e_int_ratio.into(),
            rep.micro_norm_hn.into(),
            rep.micro_norm_hn_nu.into(),
            rep.fluid_grad_norm.into(),
            rep.charge_norm.into(),
            rep.conservation.energy_drift.into(),
            cl.rel_diff_a.into(),
            cl.rel_diff_b.into(),
            cl.remainder_a.into(),
            cl.remainder_b.into(),
        ])?;
    }
    let fit = |q: &str, f: fn(&EpsilonSummary) -> f64| {
        let pts: Vec<(f64, f64)> = per_epsilon.iter().map(|s| (s.epsilon, f(s))).collect();
        let (slope, points) = loglog_slope(&pts);
        Slope { quantity: q.to_string(), slope, points }
    };
    let slopes = vec![
        fit("remainder_a_sup", |s| s.remainder_a_sup),
        fit("remainder_b_sup", |s| s.remainder_b_sup),
        fit("energy_constant", |s| s.energy_constant),
        fit("dissipation_constant", |s| s.dissipation_constant),
    ];
    Ok((CheckSummary { order: cfg.order, per_epsilon, slopes }, table))
}
