//! Initial data: Fourier-mode fields and the well-prepared kinetic state.

use crate::config::{InitConfig, InitKind, Mode, VectorMode};
use ndarray::Array2;
use std::path::Path;
use vpblimit_core::kinetic_solver::{KineticModel, KineticState};
use vpblimit_core::macro_micro::Projector;
use vpblimit_core::spatial_field::{ScalarField, Snapshot, SnapshotHeader, SpatialGrid, VectorField, SNAPSHOT_VERSION};
use vpblimit_core::velocity_space::VelocityQuadrature;
use vpblimit_core::{Error, Result};

fn check_mode(grid: &SpatialGrid, k: &[i64; 3]) -> Result<()> {
    let d = grid.dim();
    let half = (grid.points_per_axis() / 2) as i64;
    for (axis, &ka) in k.iter().enumerate() {
        if axis >= d && ka != 0 {
            return Err(Error::InvalidInput(format!("mode {k:?} has a wavenumber along axis {axis} of a {d}-d grid")));
        }
        if ka.abs() >= half {
            return Err(Error::InvalidInput(format!("mode {k:?} is not resolved by {} points per axis", grid.points_per_axis())));
        }
    }
    Ok(())
}

fn phase_at(grid: &SpatialGrid, k: &[i64; 3], x: [f64; 3]) -> f64 {
    (0..3).map(|a| {
        let len = grid.lengths().get(a).copied().unwrap_or(std::f64::consts::TAU);
        k[a] as f64 * std::f64::consts::TAU / len * x[a]
    }).sum()
}

/// Σ a·cos(k·x + phase) sampled on the grid.
pub fn scalar_from_modes(grid: &SpatialGrid, modes: &[Mode]) -> Result<ScalarField> {
    for m in modes {
        check_mode(grid, &m.k)?;
    }
    Ok(ScalarField::from_fn(grid, |x| modes.iter().map(|m| m.amplitude * (phase_at(grid, &m.k, x) + m.phase).cos()).sum()))
}

pub fn vector_from_modes(grid: &SpatialGrid, modes: &[VectorMode]) -> Result<VectorField> {
    let mut comps = Vec::with_capacity(3);
    for c in 0..3 {
        let list: Vec<Mode> = modes
            .iter()
            .filter(|m| m.component == c)
            .map(|m| Mode { k: m.k, amplitude: m.amplitude, phase: m.phase })
            .collect();
        comps.push(scalar_from_modes(grid, &list)?);
    }
    if let Some(m) = modes.iter().find(|m| m.component > 2) {
        return Err(Error::InvalidInput(format!("velocity component {} out of range", m.component)));
    }
    VectorField::new(comps)
}

/// ρ₀, u₀, θ₀ of a mode-list init.
pub fn limit_fields(grid: &SpatialGrid, init: &InitConfig) -> Result<(ScalarField, VectorField, ScalarField)> {
    Ok((scalar_from_modes(grid, &init.rho0)?, vector_from_modes(grid, &init.u0)?, scalar_from_modes(grid, &init.theta0)?))
}

/// g₀(x, v) = ρ₀(x) + u₀(x)·v + θ₀(x)(|v|²/2 − 3/2), one velocity row per grid point.
pub fn build_well_prepared(
    rho0: &ScalarField,
    u0: &VectorField,
    theta0: &ScalarField,
    quad: &VelocityQuadrature,
) -> Result<Array2<f64>> {
    let grid = rho0.grid();
    if u0.grid() != grid || theta0.grid() != grid || u0.len() != 3 {
        return Err(Error::Structure("ρ₀, u₀ (three components) and θ₀ must share one grid".into()));
    }
    let scale = rho0.max_abs().max(1.0);
    if rho0.mean().abs() > 1e-12 * scale {
        return Err(Error::Structure(format!(
            "density has spatial mean {:.3e}; the periodic Poisson gauge needs zero mean",
            rho0.mean()
        )));
    }
    let nodes = quad.nodes();
    let (r, t) = (rho0.values(), theta0.values());
    let u: Vec<&[f64]> = u0.components.iter().map(|c| c.values()).collect();
    let g = Array2::from_shape_fn((grid.len(), nodes.len()), |(i, j)| {
        let v = nodes[j];
        let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        r[i] + u[0][i] * v[0] + u[1][i] * v[1] + u[2][i] * v[2] + t[i] * (0.5 * s2 - 1.5)
    });
    let micro = Projector::new(quad).micro(g.view());
    let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let hmax = micro.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if hmax > 1e-10 * gmax {
        return Err(Error::Numerical(format!("well-prepared data has micro part {hmax:.3e}")));
    }
    Ok(g)
}

pub fn snapshot_header(model: &KineticModel, time: f64) -> SnapshotHeader {
    let q = model.quad();
    SnapshotHeader {
        format_version: SNAPSHOT_VERSION,
        d: model.grid.dim(),
        points_per_axis: model.grid.points_per_axis(),
        lengths: model.grid.lengths().to_vec(),
        nodes_per_axis: q.nodes_per_axis(),
        scaling: q.scaling(),
        time,
        epsilon: model.epsilon,
        gamma: model.gamma,
    }
}

/// Kinetic state as a snapshot with arrays `g` (points × nodes) and `phi`.
pub fn state_snapshot(model: &KineticModel, state: &KineticState) -> Result<Snapshot> {
    let mut snap = Snapshot::new(snapshot_header(model, state.time));
    let (nx, nv) = state.g.dim();
    snap.push("g", vec![nx, nv], state.g.iter().copied().collect())?;
    snap.push("phi", vec![nx], state.phi.values().to_vec())?;
    Ok(snap)
}

/// Recovers a state from a snapshot written by [`state_snapshot`] for the same grids.
pub fn state_from_snapshot(model: &KineticModel, snap: &Snapshot, path: &Path) -> Result<KineticState> {
    let h = &snap.header;
    let fmt = |reason: String| Error::Format { path: path.to_path_buf(), reason };
    if h.d != model.grid.dim()
        || h.points_per_axis != model.grid.points_per_axis()
        || h.lengths != model.grid.lengths()
        || h.nodes_per_axis != model.quad().nodes_per_axis()
        || h.scaling != model.quad().scaling()
    {
        return Err(fmt("snapshot grids differ from the configured ones".into()));
    }
    let a = snap.get("g").ok_or_else(|| fmt("missing array g".into()))?;
    let shape = (model.grid.len(), model.quad().len());
    if a.shape != [shape.0, shape.1] {
        return Err(fmt(format!("array g has shape {:?}, expected {shape:?}", a.shape)));
    }
    let g = Array2::from_shape_vec(shape, a.data.clone()).map_err(|e| fmt(e.to_string()))?;
    model.state(g, h.time)
}

/// Initial kinetic state for a run configuration.
pub fn initial_state(model: &KineticModel, init: &InitConfig, base: &Path) -> Result<KineticState> {
    match init.kind {
        InitKind::WellPrepared => {
            let (r, u, t) = limit_fields(&model.grid, init)?;
            let g = build_well_prepared(&r, &u, &t, model.quad())?;
            model.state(g, 0.0)
        }
        InitKind::CustomSnapshot => {
            let rel = init
                .snapshot
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("init.snapshot is required for custom_snapshot".into()))?;
            let path = base.join(rel);
            let snap = Snapshot::load(&path)?;
            state_from_snapshot(model, &snap, &path)
        }
    }
}
