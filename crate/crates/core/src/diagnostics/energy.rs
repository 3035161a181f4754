use crate::error::{Error, Result};
use crate::kinetic_solver::{ConservationRecord, KineticModel, KineticState};
use crate::macro_micro::ThirteenMomentBasis;
use crate::spatial_field::{sobolev_norm, FftNd, ScalarField, SpatialGrid};
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Regularity index used by default for the functionals.
pub const DEFAULT_ORDER: usize = 2;

/// Σ_{|α|=s} k^{2α} for s = 0..=order at one wave vector.
fn shell_weights(k: [f64; 3], d: usize, order: usize) -> Vec<f64> {
    // h_s(k_1², …, k_d²): complete homogeneous symmetric polynomials.
    let mut h = vec![0.0; order + 1];
    h[0] = 1.0;
    for a in 0..d {
        let x = k[a] * k[a];
        for s in 1..=order {
            h[s] += x * h[s - 1];
        }
    }
    h
}

/// Spatial spectra of every velocity column, as (re, im) arrays of shape
/// (grid points, velocity nodes).
fn column_spectra(grid: &SpatialGrid, g: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let mut fft = FftNd::new(grid);
    let (nx, nv) = g.dim();
    let mut re = Array2::zeros((nx, nv));
    let mut im = Array2::zeros((nx, nv));
    let mut j = 0;
    let neg: Vec<usize> = (0..nx).map(|i| fft.negate_index(i)).collect();
    let mut z = vec![Complex64::new(0.0, 0.0); nx];
    while j < nv {
        let two = j + 1 < nv;
        for i in 0..nx {
            z[i] = Complex64::new(g[[i, j]], if two { g[[i, j + 1]] } else { 0.0 });
        }
        fft.forward(&mut z);
        for i in 0..nx {
            let zc = z[neg[i]].conj();
            let a = (z[i] + zc) * 0.5;
            let b = (z[i] - zc) * Complex64::new(0.0, -0.5);
            re[[i, j]] = a.re;
            im[[i, j]] = a.im;
            if two {
                re[[i, j + 1]] = b.re;
                im[[i, j + 1]] = b.im;
            }
        }
        j += 2;
    }
    (re, im)
}

/// Shared spectral data for the norms of one state.
pub struct Norms<'a> {
    model: &'a KineticModel,
    shells: Vec<Vec<f64>>,
    scale: f64,
}

impl<'a> Norms<'a> {
    pub fn new(model: &'a KineticModel, order: usize) -> Self {
        let grid = &model.grid;
        let shells = (0..grid.len()).map(|i| shell_weights(grid.wavevector(i), grid.dim(), order)).collect();
        Self { model, shells, scale: grid.volume() / (grid.len() as f64).powi(2) }
    }

    fn order(&self) -> usize {
        self.shells[0].len() - 1
    }

    fn cumulative(&self, i: usize, upto: usize) -> f64 {
        self.shells[i][..=upto].iter().sum()
    }

    /// Σ_{|α|≤m} ‖∂^α_x g‖²_{L²_{x,v}} (optionally with an extra |k|² factor).
    fn hx_lv(&self, g: ArrayView2<f64>, m: usize, grad: bool, nu: bool) -> f64 {
        let (re, im) = column_spectra(&self.model.grid, g);
        let w = self.vweights(nu);
        self.sum_spectral(&re, &im, &w, |i| {
            let c = self.cumulative(i, m);
            if grad {
                c * self.shells[i][1]
            } else {
                c
            }
        })
    }

    fn vweights(&self, nu: bool) -> Vec<f64> {
        let quad = self.model.quad();
        if nu {
            let n = &self.model.velocity.l.nu().values;
            quad.weights().iter().zip(n).map(|(w, n)| w * n).collect()
        } else {
            quad.weights().to_vec()
        }
    }

    fn sum_spectral(&self, re: &Array2<f64>, im: &Array2<f64>, w: &[f64], kw: impl Fn(usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, (r, m)) in re.outer_iter().zip(im.outer_iter()).enumerate() {
            let s: f64 = r.iter().zip(m.iter()).zip(w).map(|((a, b), w)| w * (a * a + b * b)).sum();
            total += s * kw(i);
        }
        total * self.scale
    }

    /// ‖g‖²_{H^N_x L²_v}.
    pub fn hx_lv_sq(&self, g: ArrayView2<f64>) -> f64 {
        self.hx_lv(g, self.order(), false, false)
    }

    /// ‖∇_x g‖²_{H^{N−1}_x L²_v}.
    pub fn grad_hx_lv_sq(&self, g: ArrayView2<f64>) -> f64 {
        self.hx_lv(g, self.order().saturating_sub(1), true, false)
    }

    /// Σ_{|α|+|β|≤N} ‖∂^α_x ∂^β_v h‖², optionally ν-weighted.
    pub fn hxv_sq(&self, h: ArrayView2<f64>, nu: bool) -> Result<f64> {
        let order = self.order();
        let herm = self.model.velocity.q.hermite();
        if order > herm.max_degree() {
            return Err(Error::Structure(format!(
                "order {order} exceeds the velocity basis degree {}",
                herm.max_degree()
            )));
        }
        let (re, im) = column_spectra(&self.model.grid, h);
        let w = self.vweights(nu);
        let deriv = herm.derivative();
        let mut total = 0.0;
        // breadth-first over multi-indices β with |β| ≤ order, β non-decreasing in axis
        let mut frontier: Vec<(usize, Array2<f64>, Array2<f64>)> = vec![(0, re, im)];
        for level in 0..=order {
            let mut next = Vec::new();
            for (last, r, m) in &frontier {
                let m_left = order - level;
                total += self.sum_spectral(r, m, &w, |i| self.cumulative(i, m_left));
                if level < order {
                    for a in *last..3 {
                        let mut r2 = Array2::zeros(r.raw_dim());
                        let mut m2 = Array2::zeros(m.raw_dim());
                        deriv.apply(a, r.view(), r2.view_mut());
                        deriv.apply(a, m.view(), m2.view_mut());
                        next.push((a, r2, m2));
                    }
                }
            }
            frontier = next;
        }
        Ok(total)
    }
}

/// ‖(I − P)g‖²_{H^N_{x,v}}, ν-weighted or not.
pub fn micro_norm_sq(model: &KineticModel, state: &KineticState, order: usize, nu: bool) -> Result<f64> {
    let h = model.velocity.projector.micro(state.g.view());
    Norms::new(model, order).hxv_sq(h.view(), nu)
}

/// E_N = ‖g‖²_{H^N_x L²_v} + ‖∇φ‖²_{H^N_x} + ‖(I − P)g‖²_{H^N_{x,v}}.
pub fn energy_e_n(model: &KineticModel, state: &KineticState, order: usize) -> Result<f64> {
    check_order(order)?;
    let norms = Norms::new(model, order);
    let h = model.velocity.projector.micro(state.g.view());
    Ok(norms.hx_lv_sq(state.g.view()) + grad_phi_sq(&state.phi, order) + norms.hxv_sq(h.view(), false)?)
}

fn grad_phi_sq(phi: &ScalarField, order: usize) -> f64 {
    let grid = phi.grid();
    let scale = grid.volume() / (grid.len() as f64).powi(2);
    phi.spectrum()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let sh = shell_weights(grid.wavevector(i), grid.dim(), order);
            scale * z.norm_sqr() * sh[1] * sh.iter().sum::<f64>()
        })
        .sum()
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidInput("the energy functionals need N ≥ 1".into()));
    }
    Ok(())
}

/// D_N = (1/ε²)‖(I − P)g‖²_{H^N_{x,v}(ν)} + ‖∇_x Pg‖²_{H^{N−1}_x L²_v} + ‖⟨g,1⟩‖²_{H^{N−1}_x}.
pub fn dissipation_d_n(model: &KineticModel, state: &KineticState, order: usize) -> Result<f64> {
    check_order(order)?;
    let norms = Norms::new(model, order);
    let proj = &model.velocity.projector;
    let h = proj.micro(state.g.view());
    let pg = proj.project(state.g.view());
    let charge = ScalarField::new(&model.grid, model.velocity.density(state.g.view()))?;
    let eps2 = model.epsilon * model.epsilon;
    Ok(norms.hxv_sq(h.view(), true)? / eps2 + norms.grad_hx_lv_sq(pg.view()) + sobolev_norm(&charge, order - 1).powi(2))
}

/// Σ_{|α|≤m} ⟨∂^α f, ∂^α g⟩ with optional ∂_a applied to f.
fn paired(f: &ScalarField, g: &ScalarField, m: usize, deriv: Option<usize>) -> f64 {
    let grid = f.grid();
    let scale = grid.volume() / (grid.len() as f64).powi(2);
    let (fs, gs) = (f.spectrum(), g.spectrum());
    let mut total = 0.0;
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let sh: f64 = shell_weights(k, grid.dim(), m).iter().sum();
        let mut a = fs[i];
        if let Some(ax) = deriv {
            a *= Complex64::new(0.0, k[ax]);
        }
        total += scale * sh * (a * gs[i].conj()).re;
    }
    total
}

/// E_int with the dual-basis combinations ζ_i, ζ_ij.
pub fn interactive_energy(model: &KineticModel, state: &KineticState, basis: &ThirteenMomentBasis, order: usize) -> Result<f64> {
    check_order(order)?;
    let m = order - 1;
    let grid = &model.grid;
    let quad = model.quad();
    let w = quad.weights();
    let proj = &model.velocity.projector;
    let h = proj.micro(state.g.view());
    let ms = model.macro_state(state);
    let pair_v = |z: &[f64]| -> Result<ScalarField> {
        let wz: ndarray::Array1<f64> = z.iter().zip(w).map(|(a, b)| a * b).collect();
        ScalarField::new(grid, h.dot(&wz).to_vec())
    };
    let c = ScalarField::new(grid, ms.c.clone())?;
    let rho = ScalarField::new(grid, ms.rho())?;
    let b: Vec<ScalarField> = ms.b.iter().map(|x| ScalarField::new(grid, x.clone())).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..3 {
        total += 32.0 * paired(&pair_v(&basis.zeta_i(i))?, &c, m, Some(i));
    }
    let mut div_b_rho = 0.0;
    for i in 0..3 {
        div_b_rho += paired(&b[i], &rho, m, Some(i));
    }
    total -= 2.0 * div_b_rho;
    for i in 0..3 {
        for j in 0..3 {
            total += 32.0 * paired(&pair_v(&basis.zeta_ij(i, j))?, &b[i], m, Some(j));
        }
    }
    Ok(total)
}

/// One row of the energy machinery at a time instant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub order: usize,
    pub e_n: f64,
    pub d_n_eps: f64,
    pub e_int: f64,
    /// |E_int| / ‖g‖²_{H^N_x L²_v}.
    pub e_int_ratio: f64,
    pub micro_norm_hn: f64,
    pub micro_norm_hn_nu: f64,
    pub fluid_grad_norm: f64,
    pub charge_norm: f64,
    pub conservation: ConservationRecord,
    pub closure_a: f64,
    pub closure_b: f64,
}

/// All functionals at once (closure residuals left at zero).
pub fn energy_report(
    model: &KineticModel,
    state: &KineticState,
    basis: &ThirteenMomentBasis,
    order: usize,
    conservation: ConservationRecord,
) -> Result<EnergyReport> {
    check_order(order)?;
    let norms = Norms::new(model, order);
    let proj = &model.velocity.projector;
    let h = proj.micro(state.g.view());
    let pg = proj.project(state.g.view());
    let charge = ScalarField::new(&model.grid, model.velocity.density(state.g.view()))?;
    let g_sq = norms.hx_lv_sq(state.g.view());
    let micro = norms.hxv_sq(h.view(), false)?;
    let micro_nu = norms.hxv_sq(h.view(), true)?;
    let fluid = norms.grad_hx_lv_sq(pg.view());
    let charge_sq = sobolev_norm(&charge, order - 1).powi(2);
    let eps2 = model.epsilon * model.epsilon;
    let e_int = interactive_energy(model, state, basis, order)?;
    Ok(EnergyReport {
        t: state.time,
        order,
        e_n: g_sq + grad_phi_sq(&state.phi, order) + micro,
        d_n_eps: micro_nu / eps2 + fluid + charge_sq,
        e_int,
        e_int_ratio: if g_sq > 0.0 { e_int.abs() / g_sq } else { 0.0 },
        micro_norm_hn: micro.sqrt(),
        micro_norm_hn_nu: micro_nu.sqrt(),
        fluid_grad_norm: fluid.sqrt(),
        charge_norm: charge_sq.sqrt(),
        conservation,
        closure_a: 0.0,
        closure_b: 0.0,
    })
}
