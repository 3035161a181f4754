use approx::assert_relative_eq;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::OnceLock;
use vpblimit_core::collision::*;
use vpblimit_core::macro_micro::Projector;
use vpblimit_core::velocity_space::*;

struct Setup {
    quad: VelocityQuadrature,
    l: LinearizedOperator,
    q: BilinearOperator,
    nu: VelocityFunction,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let quad = build_quadrature(8, 1.0).unwrap();
        let l = assemble_l(&quad, &AngularRule::new(8).unwrap()).unwrap();
        let q = BilinearOperator::new(&quad).unwrap();
        let nu = collision_frequency(&quad);
        Setup { quad, l, q, nu }
    })
}

fn smooth_random(quad: &VelocityQuadrature, rng: &mut ChaCha8Rng) -> VelocityFunction {
    let c: Vec<f64> = (0..10).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    VelocityFunction::from_fn(quad, |v| {
        c[0] + c[1] * v[0] + c[2] * v[1] * v[2] + c[3] * v[2] * v[2] + c[4] * v[0] * v[1] * v[1]
            + c[5] * (0.3 * v[0] - 0.2 * v[2]).sin() + c[6] * v[1].powi(3) + c[7] * (-(v[0] * v[0]) / 8.0).exp()
            + c[8] * v[0] * v[1] * v[2] + c[9] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    })
}

fn random_nodal(quad: &VelocityQuadrature, rng: &mut ChaCha8Rng) -> VelocityFunction {
    VelocityFunction::new(quad, (0..quad.len()).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
}

fn ip(a: &VelocityFunction, b: &VelocityFunction) -> f64 {
    inner_product(&setup().quad, a, b, Weight::Unit).unwrap()
}

fn ip_nu(a: &VelocityFunction, b: &VelocityFunction) -> f64 {
    let s = setup();
    inner_product(&s.quad, a, b, Weight::Nu(&s.nu)).unwrap()
}

fn micro(f: &VelocityFunction) -> VelocityFunction {
    let s = setup();
    let p = Projector::new(&s.quad);
    let h = p.micro(ndarray::ArrayView2::from_shape((1, f.values.len()), &f.values).unwrap());
    VelocityFunction::new(&s.quad, h.row(0).to_vec()).unwrap()
}

#[test]
fn angular_rule_weights_and_exactness() {
    let r = AngularRule::new(8).unwrap();
    assert_relative_eq!(r.weights().iter().sum::<f64>(), 4.0 * std::f64::consts::PI, epsilon = 1e-12);
    // ∫ x² dω = 4π/3, ∫ x²y²z² dω = 4π/105
    assert_relative_eq!(r.integrate(|w| w[0] * w[0]), 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
    assert_relative_eq!(
        r.integrate(|w| (w[0] * w[1] * w[2]).powi(2)),
        4.0 * std::f64::consts::PI / 105.0,
        epsilon = 1e-12
    );
    assert!(r.exact_degree() >= 6);
}

#[test]
fn invariants_are_in_the_null_space() {
    let s = setup();
    for f in [
        VelocityFunction::from_fn(&s.quad, |_| 1.0),
        VelocityFunction::from_fn(&s.quad, |v| v[0]),
        VelocityFunction::from_fn(&s.quad, |v| v[1]),
        VelocityFunction::from_fn(&s.quad, |v| v[2]),
        VelocityFunction::from_fn(&s.quad, |v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]),
    ] {
        let lf = s.l.apply(&f).unwrap();
        let r = ip(&lf, &lf).sqrt() / (s.l.norm() * ip(&f, &f).sqrt());
        assert!(r <= s.l.tol_null().max(1e-6), "null residual {r}");
    }
}

#[test]
fn exactly_five_null_eigenvalues() {
    let s = setup();
    let tol = 1e-6 * s.l.norm();
    let zeros = s.l.eigenvalues().iter().filter(|x| x.abs() < tol).count();
    assert_eq!(zeros, 5);
    assert!(s.l.eigenvalues().iter().all(|&x| x >= -1e-8 * s.l.norm()));
    assert!(s.l.spectral_gap() > 0.0);
}

#[test]
fn self_adjoint_on_random_pairs() {
    let s = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let f = random_nodal(&s.quad, &mut rng);
        let g = random_nodal(&s.quad, &mut rng);
        let a = ip(&s.l.apply(&f).unwrap(), &g);
        let b = ip(&f, &s.l.apply(&g).unwrap());
        assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0));
    }
}

#[test]
fn l_equals_minus_twice_q_with_one() {
    let s = setup();
    let one = VelocityFunction::from_fn(&s.quad, |_| 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_nodal(&s.quad, &mut rng);
        let lf = s.l.apply(&f).unwrap();
        let q = apply_q(&s.q, &s.l, &f, &one).unwrap();
        let scale = lf.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in lf.values.iter().zip(&q.values) {
            assert!((a + 2.0 * b).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn q_of_maxwellian_vanishes_and_is_symmetric() {
    let s = setup();
    let one = VelocityFunction::from_fn(&s.quad, |_| 1.0);
    let q11 = apply_q(&s.q, &s.l, &one, &one).unwrap();
    assert!(q11.values.iter().all(|x| x.abs() < 1e-10));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (f, g) = (smooth_random(&s.quad, &mut rng), smooth_random(&s.quad, &mut rng));
    let a = apply_q(&s.q, &s.l, &f, &g).unwrap();
    let b = apply_q(&s.q, &s.l, &g, &f).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn q_is_orthogonal_to_invariants() {
    let s = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let inv = invariant_basis(&s.quad).unwrap();
    for _ in 0..100 {
        let (f, g) = (smooth_random(&s.quad, &mut rng), smooth_random(&s.quad, &mut rng));
        let q = apply_q(&s.q, &s.l, &f, &g).unwrap();
        let scale = ip(&q, &q).sqrt().max(1.0);
        for z in &inv {
            assert!(ip(&q, z).abs() <= 1e-6 * scale);
        }
    }
}

#[test]
fn q_of_v1_matches_monte_carlo() {
    let s = setup();
    let g = VelocityFunction::from_fn(&s.quad, |v| v[0]);
    let q = apply_q(&s.q, &s.l, &g, &g).unwrap();
    let k = s.quad.nodes().iter().position(|v| v[0] > 0.7 && v[0] < 2.0 && v[1].abs() < 0.6 && v[2].abs() < 0.6).unwrap();
    let v = s.quad.nodes()[k];
    // Q(g,g)(v) = ∫∫ |(v − v₁)·ω|/(2π) M(v₁)[g(v')g(v₁') − g(v)g(v₁)] dv₁ dω
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1_000_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let v1: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let nz = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
        let om = [z[0] / nz, z[1] / nz, z[2] / nz];
        let c: f64 = (0..3).map(|i| (v[i] - v1[i]) * om[i]).sum();
        let vp0 = v[0] - c * om[0];
        let v1p0 = v1[0] + c * om[0];
        acc += 2.0 * c.abs() * (vp0 * v1p0 - v[0] * v1[0]);
    }
    let mc = acc / n as f64;
    assert!((q.values[k] - mc).abs() <= 0.01 * mc.abs(), "Q = {}, MC = {mc}", q.values[k]);
}

#[test]
fn q_micro_projection_matches_weak_form_monte_carlo() {
    // ⟨Q(g,g), φ⟩ = E_{v,v₁∼M, ω∼S²}[2|(v − v₁)·ω| (g(v')g(v₁') − g(v)g(v₁)) φ(v)]
    let s = setup();
    let gs: [fn([f64; 3]) -> f64; 2] = [|v| v[0] * v[1], |v| v[0] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 5.0)];
    let phis: [fn([f64; 3]) -> f64; 2] = [|v| 2.0 * v[2] * v[2] - v[0] * v[0] - v[1] * v[1], |v| v[0] * v[0] - v[1] * v[1]];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for g in gs {
        let gf = VelocityFunction::from_fn(&s.quad, g);
        let q = apply_q(&s.q, &s.l, &gf, &gf).unwrap();
        for phi in phis {
            let galerkin = ip(&q, &VelocityFunction::from_fn(&s.quad, phi));
            let n = 2_000_000;
            let (mut m1, mut m2) = (0.0, 0.0);
            for _ in 0..n {
                let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let v1: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let nz = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                let om = [z[0] / nz, z[1] / nz, z[2] / nz];
                let c: f64 = (0..3).map(|i| (v[i] - v1[i]) * om[i]).sum();
                let vp: [f64; 3] = std::array::from_fn(|i| v[i] - c * om[i]);
                let v1p: [f64; 3] = std::array::from_fn(|i| v1[i] + c * om[i]);
                let x = 2.0 * c.abs() * (g(vp) * g(v1p) - g(v) * g(v1)) * phi(v);
                m1 += x;
                m2 += x * x;
            }
            let mean = m1 / n as f64;
            let se = ((m2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((galerkin - mean).abs() <= 4.0 * se + 1e-12, "Galerkin {galerkin}, MC {mean} ± {se}");
        }
    }
}

#[test]
fn q_micro_part_is_truncated_above_degree_three() {
    let s = setup();
    let g = VelocityFunction::from_fn(&s.quad, |v| v[0] * v[1]);
    let q = apply_q(&s.q, &s.l, &g, &g).unwrap();
    let s4 = VelocityFunction::from_fn(&s.quad, |v| {
        let r = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        r * r - 10.0 * r + 15.0
    });
    assert!(ip(&q, &s4).abs() < 1e-12);
}

#[test]
fn coercivity_is_a_lower_bound_on_random_rayleigh_quotients() {
    let s = setup();
    let delta = estimate_coercivity(&s.l);
    assert!(delta > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..1000 {
        let f = random_nodal(&s.quad, &mut rng);
        let h = micro(&f);
        let ratio = ip(&s.l.apply(&f).unwrap(), &f) / ip_nu(&h, &h);
        min_ratio = min_ratio.min(ratio);
    }
    assert!(delta <= min_ratio * (1.0 + 1e-10), "δ = {delta}, min ratio {min_ratio}");
}

#[test]
fn coercivity_stable_under_refinement() {
    let rule = AngularRule::new(8).unwrap();
    let a = assemble_l(&build_quadrature(8, 1.0).unwrap(), &rule).unwrap().coercivity();
    let b = assemble_l(&build_quadrature(12, 1.0).unwrap(), &rule).unwrap().coercivity();
    assert!((a / b - 1.0).abs() <= 0.05, "δ(8) = {a}, δ(12) = {b}");
}

#[test]
fn coercivity_tight_on_kernel() {
    let s = setup();
    for z in s.l.null_basis() {
        let lz = s.l.apply(z).unwrap();
        assert!(ip(&lz, z).abs() < 1e-10);
        let h = micro(z);
        assert!(ip_nu(&h, &h) < 1e-20);
    }
}

#[test]
fn trilinear_bound_with_fitted_constant() {
    let s = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c_fit: f64 = 0.0;
    for _ in 0..200 {
        let g1 = smooth_random(&s.quad, &mut rng);
        let g2 = smooth_random(&s.quad, &mut rng);
        let g3 = smooth_random(&s.quad, &mut rng);
        let lhs = ip(&apply_q(&s.q, &s.l, &g1, &g2).unwrap(), &g3).abs();
        let rhs = ip_nu(&g1, &g1).sqrt() * ip(&g2, &g2).sqrt() * ip_nu(&g3, &g3).sqrt()
            + ip(&g1, &g1).sqrt() * ip_nu(&g2, &g2).sqrt() * ip_nu(&g3, &g3).sqrt();
        c_fit = c_fit.max(lhs / rhs);
    }
    assert!(c_fit.is_finite() && c_fit < 10.0, "fitted C = {c_fit}");
}

#[test]
fn collision_frequency_pair_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut c3: f64 = 0.0;
    for _ in 0..5000 {
        let v: [f64; 3] = std::array::from_fn(|_| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let w: [f64; 3] = std::array::from_fn(|_| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let nz = norm(z);
        let om = [z[0] / nz, z[1] / nz, z[2] / nz];
        let c: f64 = (0..3).map(|i| (v[i] - w[i]) * om[i]).sum();
        let vp: [f64; 3] = std::array::from_fn(|i| v[i] - c * om[i]);
        let wp: [f64; 3] = std::array::from_fn(|i| w[i] + c * om[i]);
        let before = collision_frequency_at(norm(v)) + collision_frequency_at(norm(w));
        let after = collision_frequency_at(norm(vp)) + collision_frequency_at(norm(wp));
        c3 = c3.max(after / before);
    }
    assert!(c3 <= std::f64::consts::SQRT_2, "fitted C₃ = {c3}");
}

#[test]
fn operator_cache_round_trip() {
    let s = setup();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("l.bin");
    save_operator(&s.l, &s.quad, &p).unwrap();
    let back = load_operator(&s.quad, &p).unwrap();
    let p2 = dir.path().join("l2.bin");
    save_operator(&back, &s.quad, &p2).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    let other = build_quadrature(6, 1.0).unwrap();
    assert!(load_operator(&other, &p).is_err());
}

#[test]
fn batched_application_matches_single() {
    let s = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<VelocityFunction> = (0..3).map(|_| random_nodal(&s.quad, &mut rng)).collect();
    let mut g = Array2::zeros((3, s.quad.len()));
    for (i, r) in rows.iter().enumerate() {
        g.row_mut(i).assign(&ndarray::ArrayView1::from(&r.values));
    }
    let out = s.l.apply_rows(g.view());
    for (i, r) in rows.iter().enumerate() {
        let single = s.l.apply(r).unwrap();
        for (a, b) in out.row(i).iter().zip(&single.values) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn l_is_positive_semidefinite(seed in any::<u64>()) {
        let s = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_nodal(&s.quad, &mut rng);
        let v = ip(&s.l.apply(&f).unwrap(), &f);
        prop_assert!(v >= -1e-8 * s.l.norm() * ip(&f, &f));
    }

    #[test]
    fn resolvent_inverts_shifted_operator(seed in any::<u64>(), tau in 0.01f64..100.0) {
        let s = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_nodal(&s.quad, &mut rng);
        let m = s.l.resolvent_rows(tau);
        let row = ndarray::ArrayView2::from_shape((1, f.values.len()), &f.values).unwrap();
        let x = row.dot(&m);
        let back = &x + &(s.l.apply_rows(x.view()) * tau);
        let r = VelocityFunction::new(&s.quad, back.iter().zip(&f.values).map(|(a, b)| a - b).collect()).unwrap();
        prop_assert!(ip(&r, &r).sqrt() <= 1e-10 * ip(&f, &f).sqrt());
    }
}
