use super::grid::SpatialGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Complex FFT over all axes of a grid. Forward is unnormalized, inverse
/// divides by the number of points.
#[derive(Clone)]
pub struct FftNd {
    n: usize,
    d: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("n", &self.n).field("d", &self.d).finish()
    }
}

impl FftNd {
    pub fn new(grid: &SpatialGrid) -> Self {
        let n = grid.points_per_axis();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let s = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { n, d: grid.dim(), fwd, inv, line: vec![Complex64::new(0.0, 0.0); n], scratch: vec![Complex64::new(0.0, 0.0); s] }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn run(&mut self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len());
        let n = self.n;
        let plan = if forward { self.fwd.clone() } else { self.inv.clone() };
        for axis in 0..self.d {
            let stride = n.pow((self.d - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut self.scratch);
                continue;
            }
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (k, x) in self.line.iter_mut().enumerate() {
                        *x = data[base + off + k * stride];
                    }
                    plan.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (k, x) in self.line.iter().enumerate() {
                        data[base + off + k * stride] = *x;
                    }
                }
            }
        }
        if !forward {
            let s = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn forward_real(&mut self, f: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut z);
        z
    }

    pub fn inverse_real(&mut self, mut z: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut z);
        z.into_iter().map(|c| c.re).collect()
    }

    /// Flat index of −k for the flat index of k.
    pub fn negate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let mut out = 0;
        let mut rem = idx;
        let mut mul = 1;
        for _ in 0..self.d {
            let j = rem % n;
            rem /= n;
            out += ((n - j) % n) * mul;
            mul *= n;
        }
        out
    }
}
