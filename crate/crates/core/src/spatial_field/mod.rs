//! Periodic spatial grids, multi-dimensional FFTs, Sobolev norms, the
//! Poisson solve for the self-consistent potential, the Leray projection
//! and the snapshot container.

mod fft;
mod field;
mod grid;
mod snapshot;

pub use fft::FftNd;
pub use field::{
    divergence, field_energy, gradient, laplacian, leray_project, sobolev_norm, solve_poisson, Field, ScalarField,
    VectorField,
};
pub use grid::SpatialGrid;
pub use snapshot::{NamedArray, Snapshot, SnapshotHeader, SNAPSHOT_VERSION};
