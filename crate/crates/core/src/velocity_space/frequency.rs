use super::function::VelocityFunction;
use super::quadrature::VelocityQuadrature;
use crate::gauss;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn rule64() -> &'static gauss::Rule {
    static RULE: OnceLock<gauss::Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss::legendre(64).expect("legendre rule"))
}

/// ν(v) = ∫ |v - v₁| M(v₁) dv₁ as a function of s = |v|.
///
/// The spherical average of |v - v₁| over |v₁| = r is s + r²/(3s) for r < s
/// and r + s²/(3r) for r > s, leaving two smooth radial integrals.
pub fn collision_frequency_at(s: f64) -> f64 {
    let s = s.abs();
    let rule = rule64();
    let radial = |r: f64| 4.0 * PI * r * r * (2.0 * PI).powf(-1.5) * (-r * r / 2.0).exp();
    let r_top = s.max(0.0) + 14.0;
    let inner = if s > 0.0 {
        rule.mapped(0.0, s).integrate(|r| radial(r) * (s + r * r / (3.0 * s)))
    } else {
        0.0
    };
    let outer = rule.mapped(s, r_top).integrate(|r| {
        if r > 0.0 {
            radial(r) * (r + s * s / (3.0 * r))
        } else {
            0.0
        }
    });
    inner + outer
}

/// Nodal collision frequency on a quadrature.
pub fn collision_frequency(quad: &VelocityQuadrature) -> VelocityFunction {
    VelocityFunction::from_fn(quad, |v| collision_frequency_at((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()))
}
