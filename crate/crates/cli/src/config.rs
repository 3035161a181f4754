//! Configuration files (TOML) for every subcommand.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use vpblimit_core::kinetic_solver::{CollisionStep, PositivityPolicy, Scheme};
use vpblimit_core::{Error, Result};

/// a·cos(k·x + phase) on the 2π-periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: [i64; 3],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A Fourier mode of one velocity component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorMode {
    pub component: usize,
    pub k: [i64; 3],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    WellPrepared,
    CustomSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    #[serde(rename = "type")]
    pub kind: InitKind,
    pub rho0: Vec<Mode>,
    pub u0: Vec<VectorMode>,
    pub theta0: Vec<Mode>,
    pub snapshot: Option<PathBuf>,
}

impl Default for InitConfig {
    /// Shear flow plus a density–temperature mode in Boussinesq balance for γ = 1.
    fn default() -> Self {
        let d = 0.05;
        Self {
            kind: InitKind::WellPrepared,
            rho0: vec![Mode { k: [1, 0, 0], amplitude: d, phase: 0.0 }],
            u0: vec![
                VectorMode { component: 0, k: [0, 1, 0], amplitude: d, phase: -std::f64::consts::FRAC_PI_2 },
                VectorMode { component: 1, k: [1, 0, 0], amplitude: 0.5 * d, phase: -std::f64::consts::FRAC_PI_2 },
            ],
            theta0: vec![Mode { k: [1, 0, 0], amplitude: -2.0 * d, phase: 0.0 }],
            snapshot: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv_path: Option<PathBuf>,
    pub snapshot_path: Option<PathBuf>,
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv_path: None, snapshot_path: None, snapshot_every: 0 }
    }
}

/// `run`: one kinetic simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub d: usize,
    pub points_per_axis: usize,
    pub nodes_per_axis: usize,
    pub angular_order: usize,
    pub epsilon: f64,
    pub gamma: f64,
    /// Time step; the CFL limit when absent.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub collision: CollisionStep,
    pub linearized_mode: bool,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub positivity: PositivityPolicy,
    pub diagnostics_order: usize,
    pub init: InitConfig,
    pub audit_every: usize,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 2,
            points_per_axis: 32,
            nodes_per_axis: 10,
            angular_order: 8,
            epsilon: 0.5,
            gamma: 1.0,
            dt: None,
            t_end: 0.5,
            scheme: Scheme::ImexStrang,
            collision: CollisionStep::Resolvent,
            linearized_mode: false,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            positivity: PositivityPolicy::Report,
            diagnostics_order: 2,
            init: InitConfig::default(),
            audit_every: 10,
            output: OutputConfig::default(),
        }
    }
}

/// `converge`: the ε-sweep against the fluid limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    pub d: usize,
    pub points_per_axis: usize,
    pub nodes_per_axis: usize,
    pub angular_order: usize,
    pub gamma: f64,
    pub t_end: f64,
    /// Spacing of the comparison and diagnostic samples.
    pub sample_interval: f64,
    /// Fraction of the CFL limit used as the kinetic step.
    pub dt_fraction: f64,
    pub fluid_dt: f64,
    pub scheme: Scheme,
    pub collision: CollisionStep,
    /// N of the energy functionals.
    pub order: usize,
    /// Sobolev index of the moment comparison norms (≤ N − 1).
    pub n_cmp: usize,
    /// ℓ₀: E_N(0) must not exceed this.
    pub energy_threshold: f64,
    pub init: InitConfig,
    /// Directory (relative to `--out`) receiving the final state of every ε.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.5, 0.25, 0.125],
            d: 2,
            points_per_axis: 32,
            nodes_per_axis: 10,
            angular_order: 8,
            gamma: 1.0,
            t_end: 0.5,
            sample_interval: 0.025,
            dt_fraction: 1.0,
            fluid_dt: 0.005,
            scheme: Scheme::ImexStrang,
            collision: CollisionStep::Exponential,
            order: 2,
            n_cmp: 1,
            energy_threshold: 2.0,
            init: InitConfig::default(),
            snapshot_dir: None,
        }
    }
}

/// `fluid`: the limit system alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidConfig {
    pub d: usize,
    pub points_per_axis: usize,
    /// Velocity grid used to compute μ and κ when they are not given.
    pub nodes_per_axis: usize,
    pub angular_order: usize,
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub init: InitConfig,
    pub output: OutputConfig,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            d: 2,
            points_per_axis: 32,
            nodes_per_axis: 10,
            angular_order: 8,
            mu: None,
            kappa: None,
            gamma: 1.0,
            dt: 0.005,
            t_end: 1.0,
            sample_every: 10,
            init: InitConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// `transport`: μ, κ and the Sonine reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub nodes_per_axis: Vec<usize>,
    pub angular_order: usize,
    pub sonine_order: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { nodes_per_axis: vec![10, 12], angular_order: 8, sonine_order: 5 }
    }
}

/// `relax`: homogeneous linearized relaxation of one eigenfunction of L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxConfig {
    pub nodes_per_axis: usize,
    pub angular_order: usize,
    pub epsilon: f64,
    /// Index of the eigenfunction (5 is the slowest non-conserved mode).
    pub mode: usize,
    pub steps_per_efold: usize,
    pub efolds: f64,
    pub collision: CollisionStep,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            nodes_per_axis: 10,
            angular_order: 8,
            epsilon: 0.5,
            mode: 5,
            steps_per_efold: 200,
            efolds: 1.0,
            collision: CollisionStep::Resolvent,
        }
    }
}

/// `check`: diagnostics over stored snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub snapshots: Vec<PathBuf>,
    pub angular_order: usize,
    pub order: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { snapshots: Vec::new(), angular_order: 8, order: 2 }
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
}

impl SweepConfig {
    /// Checks ranges and returns the ε list sorted in decreasing order.
    pub fn validate(&self) -> Result<Vec<f64>> {
        let mut eps = self.epsilons.clone();
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::InvalidInput("epsilons must be non-empty and lie in (0, 1]".into()));
        }
        eps.sort_by(|a, b| b.total_cmp(a));
        if eps.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("epsilons must be distinct".into()));
        }
        if self.order == 0 || self.n_cmp + 1 > self.order {
            return Err(Error::InvalidInput("need N ≥ 1 and n_cmp ≤ N − 1".into()));
        }
        if !(self.sample_interval > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::InvalidInput("t_end and sample_interval must be positive".into()));
        }
        let ratio = self.t_end / self.sample_interval;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput("t_end must be a multiple of sample_interval".into()));
        }
        if !(self.dt_fraction > 0.0 && self.dt_fraction <= 1.0) || !(self.fluid_dt > 0.0) {
            return Err(Error::InvalidInput("dt_fraction must lie in (0, 1] and fluid_dt be positive".into()));
        }
        Ok(eps)
    }
}
