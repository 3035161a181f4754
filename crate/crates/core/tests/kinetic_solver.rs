use ndarray::Array2;
use std::sync::{Arc, OnceLock};
use vpblimit_core::kinetic_solver::*;
use vpblimit_core::spatial_field::{laplacian, ScalarField, SpatialGrid};
use vpblimit_core::velocity_space::{collision_frequency, VelocityFunction};
use vpblimit_core::Error;

fn velocity() -> Arc<VelocityModel> {
    static V: OnceLock<Arc<VelocityModel>> = OnceLock::new();
    V.get_or_init(|| Arc::new(VelocityModel::build(6, 6).unwrap())).clone()
}

fn model(d: usize, n: usize, eps: f64) -> KineticModel {
    KineticModel::new(SpatialGrid::cube(d, n).unwrap(), velocity(), eps, 1.0).unwrap()
}

/// Smooth small data with zero-mean density and a micro part.
fn smooth_data(m: &KineticModel, amp: f64) -> Array2<f64> {
    let q = m.quad();
    let mut g = Array2::zeros((m.grid.len(), q.len()));
    for i in 0..m.grid.len() {
        let x = m.grid.point(i);
        let a = x[0].cos() + 0.3 * (x[0] + x[1]).sin();
        let b = [x[1].sin(), 0.5 * x[0].cos(), 0.2 * (x[0] - x[1]).cos()];
        let c = -0.4 * x[0].cos() + 0.1;
        for (j, v) in q.nodes().iter().enumerate() {
            let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let micro = 0.3 * x[1].cos() * v[0] * v[1] + 0.2 * x[0].sin() * v[2] * (s2 - 5.0);
            g[[i, j]] = amp * (a - 0.3 + b[0] * v[0] + b[1] * v[1] + b[2] * v[2] + c * s2 + micro);
        }
    }
    g
}

fn cfg(m: &KineticModel, frac: f64) -> SolverConfig {
    SolverConfig { dt: frac * max_stable_dt(m), ..SolverConfig::default() }
}

#[test]
fn zero_state_stays_zero() {
    let m = model(2, 8, 0.5);
    for scheme in [Scheme::ImexStrang, Scheme::Picard] {
        let mut s = KineticSolver::new(m.clone(), SolverConfig { scheme, ..cfg(&m, 1.0) }).unwrap();
        let mut st = m.zero_state();
        for _ in 0..3 {
            st = s.step(&st).unwrap();
        }
        assert!(st.g.iter().all(|x| *x == 0.0) && st.phi.max_abs() == 0.0);
        if scheme == Scheme::Picard {
            assert_eq!(s.last_info().picard_increments.len(), 1);
        }
    }
}

#[test]
fn cfl_violation_refused() {
    let m = model(2, 8, 0.5);
    let max = max_stable_dt(&m);
    match KineticSolver::new(m.clone(), SolverConfig { dt: 1.5 * max, ..SolverConfig::default() }) {
        Err(Error::Cfl { dt, max: req }) => assert!(dt > req && (req - max).abs() < 1e-15),
        other => panic!("expected a CFL error, got {other:?}"),
    }
    assert!(matches!(KineticSolver::new(m, SolverConfig { dt: -1.0, ..SolverConfig::default() }), Err(Error::InvalidInput(_))));
}

#[test]
fn model_validation() {
    let g = SpatialGrid::cube(1, 4).unwrap();
    assert!(KineticModel::new(g.clone(), velocity(), 0.0, 1.0).is_err());
    assert!(KineticModel::new(g.clone(), velocity(), 1.5, 1.0).is_err());
    assert!(KineticModel::new(g.clone(), velocity(), 0.5, 0.0).is_err());
    let m = KineticModel::new(g, velocity(), 0.5, 1.0).unwrap();
    assert!(matches!(m.state(Array2::zeros((3, 3)), 0.0), Err(Error::Structure(_))));
}

#[test]
fn conservation_over_a_run() {
    let m = model(2, 8, 0.5);
    let mut s = KineticSolver::new(m.clone(), cfg(&m, 1.0)).unwrap();
    let st0 = m.state(smooth_data(&m, 0.02), 0.0).unwrap();
    let base = ConservationBaseline::new(&m, &st0);
    let r0 = base.audit(&m, &st0);
    assert_eq!((r0.mass_drift, r0.momentum_drift, r0.energy_drift), (0.0, [0.0; 3], 0.0));
    let mut st = st0;
    let (mut kin, mut field) = (vec![r0.kinetic_energy], vec![r0.field_energy]);
    for _ in 0..100 {
        st = s.step(&st).unwrap();
        let r = base.audit(&m, &st);
        assert!(r.mass_drift.abs() <= 1e-8);
        assert!(r.momentum_drift.iter().all(|x| x.abs() <= 1e-8));
        assert!(r.energy_drift.abs() <= 1e-8);
        kin.push(r.kinetic_energy);
        field.push(r.field_energy);
    }
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread(&field) > 1e-3 * field[0]);
    assert!(spread(&kin) > 0.5 * spread(&field));
}

#[test]
fn poisson_constraint_and_balance_laws() {
    let m = model(2, 8, 0.5);
    let mut s = KineticSolver::new(m.clone(), cfg(&m, 0.5)).unwrap();
    let mut prev = m.state(smooth_data(&m, 0.02), 0.0).unwrap();
    let z = m.zero_state();
    let mut zn = z.clone();
    zn.time = 0.1;
    let r = balance_residuals(&m, &z, &zn).unwrap();
    assert_eq!((r.charge, r.momentum, r.energy, r.poisson), (0.0, 0.0, 0.0, 0.0));
    for _ in 0..5 {
        let next = s.step(&prev).unwrap();
        let r = balance_residuals(&m, &prev, &next).unwrap();
        assert!(r.poisson <= 1e-10);
        let rho = ScalarField::new(&m.grid, m.velocity.density(next.g.view())).unwrap();
        assert!(laplacian(&next.phi).axpy(-1.0, &rho).max_abs() <= 1e-10);
        prev = next;
    }
}

#[test]
fn balance_residuals_shrink_with_dt() {
    let m = model(1, 8, 0.5);
    let g0 = smooth_data(&m, 0.02);
    let res = |frac: f64| {
        let mut s = KineticSolver::new(m.clone(), cfg(&m, frac)).unwrap();
        let a = m.state(g0.clone(), 0.0).unwrap();
        let b = s.step(&a).unwrap();
        balance_residuals(&m, &a, &b).unwrap()
    };
    let (c, f) = (res(0.5), res(0.125));
    assert!(f.charge < c.charge && f.momentum < c.momentum && f.energy < c.energy);
}

#[test]
fn linearized_relaxation_matches_eigen_decay() {
    let m = model(1, 2, 0.5);
    let l = &m.velocity.l;
    let (lam, e) = (l.eigenvalues()[5], l.eigenfunction(5));
    let dt = 0.25 / (lam * 200.0);
    let mut s = KineticSolver::new(m.clone(), SolverConfig { dt, linearized_mode: true, ..SolverConfig::default() }).unwrap();
    let g0 = Array2::from_shape_fn((2, m.quad().len()), |(_, j)| e[j]);
    let mut st = m.state(g0, 0.0).unwrap();
    let w = m.quad().weights();
    for k in 1..=200 {
        st = s.step(&st).unwrap();
        let amp: f64 = st.g.row(0).iter().zip(&e).zip(w).map(|((g, e), w)| g * e * w).sum();
        let exact = (-lam * k as f64 * dt / 0.25).exp();
        assert!((amp / exact - 1.0).abs() <= 0.01);
    }
}

#[test]
fn collision_substep_keeps_macro_part() {
    let m = model(2, 8, 0.25);
    let g0 = smooth_data(&m, 0.05);
    for linearized_mode in [true, false] {
        let s = KineticSolver::new(m.clone(), SolverConfig { linearized_mode, ..cfg(&m, 1.0) }).unwrap();
        let after = s.collide(g0.view());
        let p = &m.velocity.projector;
        let d = p.project(after.view()) - p.project(g0.view());
        assert!(d.iter().all(|x| x.abs() <= 1e-10));
    }
}

#[test]
fn asymptotic_preserving_contraction() {
    // x-homogeneous micro data: transport and fields vanish, one step is one collision substep
    let m = model(1, 2, 1e-3);
    let l = &m.velocity.l;
    let delta = l.coercivity();
    let nu = collision_frequency(m.quad());
    let p = &m.velocity.projector;
    let dt = 0.5 * max_stable_dt(&m);
    let mut s = KineticSolver::new(m.clone(), SolverConfig { dt, linearized_mode: true, ..SolverConfig::default() }).unwrap();
    let f = VelocityFunction::from_fn(m.quad(), |v| v[0] * v[1] + 0.3 * v[2] * (v[0] * v[0] - 1.0) + (-(v[1] * v[1]) / 3.0).exp());
    let g0 = p.micro(Array2::from_shape_fn((2, f.values.len()), |(_, j)| f.values[j]).view());
    let nu_norm = |g: &Array2<f64>| -> f64 {
        g.row(0).iter().zip(&nu.values).zip(m.quad().weights()).map(|((x, n), w)| n * w * x * x).sum::<f64>().sqrt()
    };
    let st = s.step(&m.state(g0.clone(), 0.0).unwrap()).unwrap();
    let h1 = p.micro(st.g.view());
    let bound = 1.0 / (1.0 + dt * delta / 1e-6);
    assert!(nu_norm(&h1) <= bound * nu_norm(&g0), "{} > {}", nu_norm(&h1) / nu_norm(&g0), bound);
}

#[test]
fn picard_increments_decrease_and_match_strang() {
    let m = model(1, 8, 0.5);
    let g0 = smooth_data(&m, 0.01);
    let t_end = 8.0 * 0.5 * max_stable_dt(&m);
    let run = |scheme: Scheme, steps: usize| -> (Array2<f64>, Vec<Vec<f64>>) {
        let c = SolverConfig { dt: t_end / steps as f64, scheme, collision: CollisionStep::Exponential, ..SolverConfig::default() };
        let mut s = KineticSolver::new(m.clone(), c).unwrap();
        let mut st = m.state(g0.clone(), 0.0).unwrap();
        let mut hist = Vec::new();
        for _ in 0..steps {
            st = s.step(&st).unwrap();
            hist.push(s.last_info().picard_increments.clone());
        }
        (st.g, hist)
    };
    let mut diffs = Vec::new();
    for steps in [8, 16, 32, 64] {
        let (a, hist) = run(Scheme::Picard, steps);
        let (b, _) = run(Scheme::ImexStrang, steps);
        for h in &hist {
            assert!(h.windows(2).all(|w| w[1] < w[0]));
        }
        diffs.push((&a - &b).iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    for w in diffs.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((slope - 2.0).abs() < 0.3, "slope {slope}, differences {diffs:?}");
    }
}

#[test]
fn picard_reports_non_convergence() {
    let m = model(1, 8, 0.5);
    let c = SolverConfig { dt: max_stable_dt(&m), scheme: Scheme::Picard, picard_max_iters: 2, picard_tol: 1e-300, ..SolverConfig::default() };
    let mut s = KineticSolver::new(m.clone(), c).unwrap();
    match s.step(&m.state(smooth_data(&m, 0.01), 0.0).unwrap()) {
        Err(Error::Picard { history }) => assert_eq!(history.len(), 2),
        other => panic!("expected a Picard error, got {other:?}"),
    }
}

#[test]
fn positivity_policy() {
    let m = model(1, 8, 1.0);
    let g0 = smooth_data(&m, 5.0);
    let mut report = KineticSolver::new(m.clone(), cfg(&m, 1.0)).unwrap();
    report.step(&m.state(g0.clone(), 0.0).unwrap()).unwrap();
    assert!(report.last_info().positivity_violations > 0 && report.last_info().min_positivity < 0.0);
    let mut fail = KineticSolver::new(m.clone(), SolverConfig { positivity: PositivityPolicy::Fail, ..cfg(&m, 1.0) }).unwrap();
    assert!(matches!(fail.step(&m.state(g0, 0.0).unwrap()), Err(Error::Numerical(_))));
}
