use approx::assert_relative_eq;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use vpblimit_core::diagnostics::*;
use vpblimit_core::kinetic_solver::*;
use vpblimit_core::macro_micro::{thirteen_basis, ThirteenMomentBasis};
use vpblimit_core::spatial_field::SpatialGrid;
use vpblimit_core::transport::{build_ab, compute_mu_kappa, TransportCoefficients};
use vpblimit_core::Error;

struct Setup {
    vm: Arc<VelocityModel>,
    tc: TransportCoefficients,
    basis: ThirteenMomentBasis,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let vm = Arc::new(VelocityModel::build(6, 6).unwrap());
        let tc = compute_mu_kappa(&vm.l, &vm.quad, &build_ab(&vm.quad)).unwrap();
        let basis = thirteen_basis(&vm.quad).unwrap();
        Setup { vm, tc, basis }
    })
}

fn model(d: usize, n: usize, eps: f64) -> KineticModel {
    KineticModel::new(SpatialGrid::cube(d, n).unwrap(), setup().vm.clone(), eps, 1.0).unwrap()
}

fn fill(m: &KineticModel, f: impl Fn([f64; 3], [f64; 3]) -> f64) -> KineticState {
    let q = m.quad();
    let g = Array2::from_shape_fn((m.grid.len(), q.len()), |(i, j)| f(m.grid.point(i), q.nodes()[j]));
    m.state(g, 0.0).unwrap()
}

fn random_state(m: &KineticModel, seed: u64, amp: f64) -> KineticState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    fill(m, |x, v| {
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        amp * (c[0] * x[0].cos()
            + c[1] * (x[0] + x[1]).sin() * v[0]
            + c[2] * x[1].cos() * v[1]
            + c[3] * x[0].sin() * (s2 - 3.0)
            + c[4] * (2.0 * x[0]).cos() * v[0] * v[1]
            + c[5] * x[1].sin() * (v[0] * v[0] - v[2] * v[2])
            + c[6] * x[0].cos() * v[2] * (s2 - 5.0)
            + c[7] * v[1] * v[2]
            + c[8] * (x[0] - x[1]).sin() * v[0] * v[2]
            + c[9] * x[1].cos() * v[0] * (s2 - 5.0)
            + c[10] * (x[0] + 2.0 * x[1]).cos() * s2
            - c[10] * (x[0] + 2.0 * x[1]).cos() * 3.0
            + c[11] * x[0].sin())
    })
}

#[test]
fn zero_state_has_zero_functionals() {
    let m = model(2, 8, 0.5);
    let z = m.zero_state();
    assert_eq!(energy_e_n(&m, &z, 2).unwrap(), 0.0);
    assert_eq!(dissipation_d_n(&m, &z, 2).unwrap(), 0.0);
    assert_eq!(interactive_energy(&m, &z, &setup().basis, 2).unwrap(), 0.0);
}

#[test]
fn velocity_shear_oracle() {
    // g = sin(x₁)v₁: ‖g‖²_{H¹L²} = ∫sin² + ∫cos² = 2π, no charge, no micro part
    let m = model(1, 16, 0.5);
    let st = fill(&m, |x, v| x[0].sin() * v[0]);
    assert_relative_eq!(energy_e_n(&m, &st, 1).unwrap(), 2.0 * PI, max_relative = 1e-10);
    assert_relative_eq!(dissipation_d_n(&m, &st, 1).unwrap(), PI, max_relative = 1e-10);
    assert!(micro_norm_sq(&m, &st, 1, true).unwrap() < 1e-20);
}

#[test]
fn pure_density_oracle() {
    // g = cos x₁: φ = −cos x₁, ‖g‖²_{H¹} = 2π, ‖∇φ‖²_{H¹} = 2π, D = ‖∇g‖² + ‖g‖² = 2π
    let m = model(1, 16, 0.5);
    let st = fill(&m, |x, _| x[0].cos());
    assert_relative_eq!(energy_e_n(&m, &st, 1).unwrap(), 4.0 * PI, max_relative = 1e-10);
    assert_relative_eq!(dissipation_d_n(&m, &st, 1).unwrap(), 2.0 * PI, max_relative = 1e-10);
}

#[test]
fn homogeneous_invariant_has_no_dissipation() {
    let m = model(2, 8, 0.5);
    let st = fill(&m, |_, v| 0.3 * v[0] - 0.2 * v[2]);
    assert!(dissipation_d_n(&m, &st, 2).unwrap() < 1e-24);
}

#[test]
fn dissipation_epsilon_scaling() {
    let (a, b) = (model(2, 8, 0.5), model(2, 8, 0.25));
    let sa = random_state(&a, 3, 0.1);
    let sb = b.state(sa.g.clone(), 0.0).unwrap();
    let ra = energy_report(&a, &sa, &setup().basis, 2, ConservationRecord::default()).unwrap();
    let rb = energy_report(&b, &sb, &setup().basis, 2, ConservationRecord::default()).unwrap();
    let rest = ra.fluid_grad_norm.powi(2) + ra.charge_norm.powi(2);
    assert_relative_eq!(rb.d_n_eps - rest, 4.0 * (ra.d_n_eps - rest), max_relative = 1e-10);
    assert_relative_eq!(ra.micro_norm_hn_nu.powi(2) / 0.25, ra.d_n_eps - rest, max_relative = 1e-10);
}

#[test]
fn order_beyond_basis_rejected() {
    let m = model(1, 8, 0.5);
    let st = random_state(&m, 1, 0.1);
    let too_high = m.velocity.q.hermite().max_degree() + 1;
    assert!(matches!(energy_e_n(&m, &st, too_high), Err(Error::Structure(_))));
    assert!(matches!(energy_e_n(&m, &st, 0), Err(Error::InvalidInput(_))));
}

#[test]
fn pythagoras_for_macro_micro_split() {
    let m = model(2, 8, 0.5);
    let st = random_state(&m, 5, 1.0);
    let norms = Norms::new(&m, 2);
    let p = &m.velocity.projector;
    let (pg, h) = (p.project(st.g.view()), p.micro(st.g.view()));
    let total = norms.hx_lv_sq(st.g.view());
    assert_relative_eq!(total, norms.hx_lv_sq(pg.view()) + norms.hx_lv_sq(h.view()), max_relative = 1e-10);
}

#[test]
fn report_entries_nonnegative() {
    let m = model(2, 8, 0.5);
    let st = random_state(&m, 8, 0.1);
    let r = energy_report(&m, &st, &setup().basis, 2, ConservationRecord::default()).unwrap();
    for x in [r.e_n, r.d_n_eps, r.micro_norm_hn, r.micro_norm_hn_nu, r.fluid_grad_norm, r.charge_norm, r.e_int_ratio] {
        assert!(x >= 0.0);
    }
    assert!(r.e_n > 0.0);
    assert_relative_eq!(r.e_n, energy_e_n(&m, &st, 2).unwrap(), max_relative = 1e-14);
}

#[test]
fn interactive_energy_vanishes_on_fluid_without_coupling() {
    let m = model(2, 8, 0.5);
    let basis = &setup().basis;
    // b = 0
    let st = fill(&m, |x, v| x[0].cos() + 0.5 * x[1].sin() * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 3.0));
    assert!(interactive_energy(&m, &st, basis, 2).unwrap().abs() < 1e-12);
    // a + 3c = 0
    let st = fill(&m, |x, v| {
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        x[1].sin() * v[0] + x[0].cos() * v[1] + (x[0] + x[1]).cos() * (s2 - 3.0)
    });
    assert!(interactive_energy(&m, &st, basis, 2).unwrap().abs() < 1e-12);
}

#[test]
fn interactive_energy_is_sign_indefinite_and_bounded() {
    let m = model(2, 8, 0.5);
    let basis = &setup().basis;
    let norms = Norms::new(&m, 2);
    let (mut pos, mut neg) = (false, false);
    for seed in 0..40 {
        let st = random_state(&m, seed, 1.0);
        let e = interactive_energy(&m, &st, basis, 2).unwrap();
        pos |= e > 0.0;
        neg |= e < 0.0;
        assert!(e.abs() <= 200.0 * norms.hx_lv_sq(st.g.view()));
    }
    assert!(pos && neg);
}

#[test]
fn closure_of_zero_state() {
    let m = model(2, 8, 0.5);
    let s = KineticSolver::new(m.clone(), SolverConfig { dt: max_stable_dt(&m), ..SolverConfig::default() }).unwrap();
    let z = m.zero_state();
    let r = kinetic_flux_closure(&s, &z, s.time_derivative(z.g.view()).view(), &setup().tc).unwrap();
    assert_eq!((r.lhs_a, r.rhs_a, r.lhs_b, r.rhs_b, r.diff_a, r.diff_b), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
}

#[test]
fn closure_is_an_identity_on_arbitrary_states() {
    for eps in [0.5, 0.125] {
        let m = model(2, 8, eps);
        let s = KineticSolver::new(m.clone(), SolverConfig { dt: max_stable_dt(&m), ..SolverConfig::default() }).unwrap();
        for seed in 0..3 {
            let st = random_state(&m, 100 + seed, 0.05);
            let r = kinetic_flux_closure(&s, &st, s.time_derivative(st.g.view()).view(), &setup().tc).unwrap();
            assert!(r.lhs_a > 0.0 && r.lhs_b > 0.0);
            assert!(r.rel_diff_a <= 1e-6 && r.rel_diff_b <= 1e-6, "{r:?}");
        }
    }
}

#[test]
fn closure_rejects_mismatched_derivative() {
    let m = model(1, 8, 0.5);
    let s = KineticSolver::new(m.clone(), SolverConfig { dt: max_stable_dt(&m), ..SolverConfig::default() }).unwrap();
    let z = m.zero_state();
    assert!(matches!(kinetic_flux_closure(&s, &z, Array2::zeros((2, 2)).view(), &setup().tc), Err(Error::Structure(_))));
}

#[test]
fn finite_difference_derivative_forms() {
    let m = model(1, 4, 0.5);
    let q = m.quad();
    let mk = |t: f64, c: f64| m.state(Array2::from_shape_fn((4, q.len()), |(_, j)| c * q.nodes()[j][0]), t).unwrap();
    let (a, b, c) = (mk(0.0, 0.0), mk(0.1, 1.0), mk(0.2, 4.0));
    let v1 = |j: usize| q.nodes()[j][0];
    assert!(finite_difference_derivative(Some(&a), &b, &c).indexed_iter().all(|((_, j), x)| (x - 20.0 * v1(j)).abs() < 1e-10));
    assert!(finite_difference_derivative(None, &b, &c).indexed_iter().all(|((_, j), x)| (x - 30.0 * v1(j)).abs() < 1e-10));
}
