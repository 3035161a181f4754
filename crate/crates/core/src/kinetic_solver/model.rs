use crate::collision::{AngularRule, BilinearOperator, LinearizedOperator};
use crate::error::{Error, Result};
use crate::macro_micro::{MacroState, Projector};
use crate::spatial_field::{solve_poisson, ScalarField, SpatialGrid};
use crate::velocity_space::{AxisOp, VelocityQuadrature};
use ndarray::{Array2, ArrayView2};
use std::sync::Arc;

/// Velocity-side precomputations shared by every run on one quadrature.
#[derive(Debug)]
pub struct VelocityModel {
    pub quad: VelocityQuadrature,
    pub l: LinearizedOperator,
    pub q: BilinearOperator,
    pub projector: Projector,
}

impl VelocityModel {
    pub fn build(nodes_per_axis: usize, angular_order: usize) -> Result<Self> {
        let quad = VelocityQuadrature::new(nodes_per_axis, 1.0)?;
        let l = LinearizedOperator::assemble(&quad, &AngularRule::new(angular_order)?)?;
        Self::from_parts(quad, l)
    }

    pub fn from_parts(quad: VelocityQuadrature, l: LinearizedOperator) -> Result<Self> {
        if l.key() != quad.key() {
            return Err(Error::Structure("operator and quadrature disagree".into()));
        }
        let q = BilinearOperator::new(&quad)?;
        let projector = Projector::new(&quad);
        Ok(Self { quad, l, q, projector })
    }

    pub fn len(&self) -> usize {
        self.quad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quad.is_empty()
    }

    pub fn raising(&self) -> &AxisOp {
        self.q.hermite().raising()
    }

    /// ⟨g, 1⟩ per grid point.
    pub fn density(&self, g: ArrayView2<f64>) -> Vec<f64> {
        let w = self.quad.weights();
        g.outer_iter().map(|r| r.iter().zip(w).map(|(x, w)| x * w).sum()).collect()
    }
}

/// Spatial grid, shared velocity model and the physical parameters of one run.
#[derive(Debug, Clone)]
pub struct KineticModel {
    pub grid: SpatialGrid,
    pub velocity: Arc<VelocityModel>,
    pub epsilon: f64,
    pub gamma: f64,
}

impl KineticModel {
    pub fn new(grid: SpatialGrid, velocity: Arc<VelocityModel>, epsilon: f64, gamma: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { grid, velocity, epsilon, gamma })
    }

    pub fn quad(&self) -> &VelocityQuadrature {
        &self.velocity.quad
    }

    /// φ from Δφ = γ⟨g,1⟩.
    pub fn potential(&self, g: ArrayView2<f64>) -> Result<ScalarField> {
        let rho = ScalarField::new(&self.grid, self.velocity.density(g))?;
        solve_poisson(&rho, self.gamma)
    }

    /// State with φ derived from g.
    pub fn state(&self, g: Array2<f64>, time: f64) -> Result<KineticState> {
        if g.dim() != (self.grid.len(), self.velocity.len()) {
            return Err(Error::Structure(format!(
                "distribution of shape {:?} does not match {} grid points × {} velocity nodes",
                g.dim(),
                self.grid.len(),
                self.velocity.len()
            )));
        }
        let phi = self.potential(g.view())?;
        Ok(KineticState { g, phi, time, epsilon: self.epsilon, gamma: self.gamma })
    }

    pub fn zero_state(&self) -> KineticState {
        self.state(Array2::zeros((self.grid.len(), self.velocity.len())), 0.0).expect("zero state")
    }

    pub fn macro_state(&self, state: &KineticState) -> MacroState {
        MacroState::from_rows(&self.velocity.projector, state.g.view())
    }
}

/// g(x, v) stored as one row of velocity values per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub g: Array2<f64>,
    pub phi: ScalarField,
    pub time: f64,
    pub epsilon: f64,
    pub gamma: f64,
}
