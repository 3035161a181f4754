use super::fft::FftNd;
use super::grid::SpatialGrid;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Real values on a periodic grid with a lazily cached spectrum.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: SpatialGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: &SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        Ok(Self { grid: grid.clone(), values, spectrum: OnceLock::new() })
    }

    pub fn zeros(grid: &SpatialGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()], spectrum: OnceLock::new() }
    }

    pub fn from_fn(grid: &SpatialGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self { grid: grid.clone(), values: grid.sample(f), spectrum: OnceLock::new() }
    }

    /// Field with the given unnormalized spectrum; the imaginary part of the
    /// inverse transform is discarded.
    pub fn from_spectrum(grid: &SpatialGrid, spectrum: Vec<Complex64>) -> Self {
        let values = FftNd::new(grid).inverse_real(spectrum);
        Self { grid: grid.clone(), values, spectrum: OnceLock::new() }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Unnormalized forward transform of the values.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| FftNd::new(&self.grid).forward_real(&self.values))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// ∫ f g dx by the trapezoid rule (spectrally exact for band-limited data).
    pub fn inner(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(&self.grid, self.values.iter().map(|x| s * x).collect()).expect("same grid")
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Self::new(&self.grid, v).expect("same grid")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(&self.grid, v).expect("same grid")
    }

    /// Applies a spectral multiplier m(k) given per flat spectral index.
    pub fn multiply(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let spec: Vec<Complex64> = self.spectrum().iter().enumerate().map(|(i, z)| m(i) * z).collect();
        Self::from_spectrum(&self.grid, spec)
    }

    /// ∂_{x_a} (zero for a ≥ d).
    pub fn derivative(&self, axis: usize) -> Self {
        if axis >= self.grid.dim() {
            return Self::zeros(&self.grid);
        }
        let g = self.grid.clone();
        self.multiply(|i| Complex64::new(0.0, g.wavevector(i)[axis]))
    }

    /// 2/3-rule dealiased copy.
    pub fn dealias(&self) -> Self {
        let mask = self.grid.dealias_mask();
        self.multiply(|i| if mask[i] { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }
}

/// Three-component vector field on a spatial grid (components beyond d
/// are allowed and carry no spatial dependence constraint).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("vector field needs at least one component".into()));
        }
        let g = components[0].grid();
        if components.iter().any(|c| c.grid() != g) {
            return Err(Error::Structure("vector components live on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &SpatialGrid, ncomp: usize) -> Self {
        Self { components: (0..ncomp).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.components[0].grid()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self { components: self.components.iter().zip(&other.components).map(|(a, b)| a.axpy(s, b)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { components: self.components.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mean()).collect()
    }
}

/// Anything made of scalar components, for norms.
pub trait Field {
    fn scalar_components(&self) -> Vec<&ScalarField>;
}

impl Field for ScalarField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
}

impl Field for VectorField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.components.iter().collect()
    }
}

/// Gradient with three components; entries beyond d vanish.
pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField { components: (0..3).map(|a| f.derivative(a)).collect() }
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = u.grid().clone();
    let d = grid.dim().min(u.len());
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    for a in 0..d {
        for (i, z) in u.components[a].spectrum().iter().enumerate() {
            spec[i] += Complex64::new(0.0, grid.wavevector(i)[a]) * z;
        }
    }
    ScalarField::from_spectrum(&grid, spec)
}

fn k2(grid: &SpatialGrid, i: usize) -> f64 {
    let k = grid.wavevector(i);
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid().clone();
    f.multiply(|i| Complex64::new(-k2(&g, i), 0.0))
}

/// Zero-mean φ with Δφ = γρ.
pub fn solve_poisson(rho: &ScalarField, gamma: f64) -> Result<ScalarField> {
    let grid = rho.grid().clone();
    let spec = rho.spectrum();
    let scale = spec.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, z) in spec.iter().enumerate() {
        let kk = k2(&grid, i);
        if kk == 0.0 {
            let resid = (gamma * z).norm() / grid.len() as f64;
            if resid > 1e-10 * scale {
                let what = if i == 0 { "mean" } else { "Nyquist" };
                return Err(Error::Structure(format!(
                    "Poisson source has nonzero {what} component {resid:e}; on the torus Δφ = γρ needs a zero-mean, band-limited source (zero-mean gauge for φ)"
                )));
            }
        } else {
            out[i] = -gamma * z / kk;
        }
    }
    Ok(ScalarField::from_spectrum(&grid, out))
}

/// Σ_{|α|≤N} Π_a k_a^{2α_a}.
fn sobolev_weight(k: [f64; 3], d: usize, order: usize) -> f64 {
    fn rec(k: &[f64], left: usize) -> f64 {
        match k.split_first() {
            None => 1.0,
            Some((&ka, rest)) => {
                let mut s = 0.0;
                let mut p = 1.0;
                for a in 0..=left {
                    s += p * rec(rest, left - a);
                    p *= ka * ka;
                }
                s
            }
        }
    }
    rec(&k[..d], order)
}

/// (Σ_{|α|≤N} ‖∂^α f‖²)^{1/2} summed over components.
pub fn sobolev_norm<F: Field + ?Sized>(f: &F, order: usize) -> f64 {
    let mut total = 0.0;
    for c in f.scalar_components() {
        let grid = c.grid();
        let norm = grid.volume() / (grid.len() as f64).powi(2);
        for (i, z) in c.spectrum().iter().enumerate() {
            total += norm * z.norm_sqr() * sobolev_weight(grid.wavevector(i), grid.dim(), order);
        }
    }
    total.sqrt()
}

/// Projection onto divergence-free fields: û − k(k·û)/|k|².
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = u.grid().clone();
    let d = grid.dim().min(u.len());
    let specs: Vec<&[Complex64]> = u.components.iter().map(|c| c.spectrum()).collect();
    let mut out: Vec<Vec<Complex64>> = specs.iter().map(|s| s.to_vec()).collect();
    for i in 0..grid.len() {
        let kk = k2(&grid, i);
        if kk == 0.0 {
            continue;
        }
        let k = grid.wavevector(i);
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += k[a] * specs[a][i];
        }
        for a in 0..d {
            out[a][i] -= k[a] * dot / kk;
        }
    }
    VectorField { components: out.into_iter().map(|s| ScalarField::from_spectrum(&grid, s)).collect() }
}

/// ‖∇φ‖²_{L²}.
pub fn field_energy(phi: &ScalarField) -> f64 {
    let grid = phi.grid();
    let norm = grid.volume() / (grid.len() as f64).powi(2);
    phi.spectrum().iter().enumerate().map(|(i, z)| norm * z.norm_sqr() * k2(grid, i)).sum()
}
