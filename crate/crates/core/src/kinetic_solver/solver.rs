use super::model::{KineticModel, KineticState};
use super::streaming::{Parts, Streaming};
use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// Safety factor of the transport CFL rule dt ≤ C·Δx·ε/(d·v_max); RK4 on
/// spectral advection is stable for C·π below 2.83.
pub const CFL_SAFETY: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexStrang,
    Picard,
}

/// Treatment of (1/ε²)L inside the collision substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionStep {
    /// (I + τL)⁻¹ with Q explicit.
    Resolvent,
    /// exp(−τL) with a second-order exponential treatment of Q.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityPolicy {
    Off,
    Report,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub collision: CollisionStep,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub linearized_mode: bool,
    pub audit_every: usize,
    pub positivity: PositivityPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::ImexStrang,
            collision: CollisionStep::Resolvent,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            linearized_mode: false,
            audit_every: 1,
            positivity: PositivityPolicy::Report,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.picard_tol > 0.0) || self.picard_max_iters == 0 || self.audit_every == 0 {
            return Err(Error::InvalidInput("dt, picard_tol, picard_max_iters and audit_every must be positive".into()));
        }
        Ok(())
    }
}

/// Largest admissible transport step.
pub fn max_stable_dt(model: &KineticModel) -> f64 {
    let g = &model.grid;
    CFL_SAFETY * g.min_spacing() * model.epsilon / (g.dim() as f64 * model.quad().v_max())
}

/// Per-step bookkeeping returned by the solver.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub picard_increments: Vec<f64>,
    pub min_positivity: f64,
    pub positivity_violations: usize,
}

/// Time stepper for the scaled perturbation equation.
#[derive(Debug)]
pub struct KineticSolver {
    model: KineticModel,
    cfg: SolverConfig,
    streaming: Streaming,
    prop: Propagator,
    last: StepInfo,
}

#[derive(Debug)]
enum Propagator {
    Resolvent(Array2<f64>),
    Exponential { e: Array2<f64>, phi1: Array2<f64>, phi2: Array2<f64> },
}

fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 - x / 6.0 + x * x / 24.0
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

impl KineticSolver {
    pub fn new(model: KineticModel, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let max = max_stable_dt(&model);
        if cfg.dt > max {
            return Err(Error::Cfl { dt: cfg.dt, max });
        }
        let tau = cfg.dt / (model.epsilon * model.epsilon);
        let l = &model.velocity.l;
        let prop = match cfg.collision {
            CollisionStep::Resolvent => Propagator::Resolvent(l.resolvent_rows(tau)),
            CollisionStep::Exponential => Propagator::Exponential {
                e: l.function_rows(|x| (-tau * x).exp()),
                phi1: l.function_rows(|x| phi1(tau * x)),
                phi2: l.function_rows(|x| phi2(tau * x)),
            },
        };
        let streaming = Streaming::new(&model);
        Ok(Self { model, cfg, streaming, prop, last: StepInfo::default() })
    }

    pub fn model(&self) -> &KineticModel {
        &self.model
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn last_info(&self) -> &StepInfo {
        &self.last
    }

    /// (1/ε)Q(g, g), or zero in linearized mode.
    fn collision_source(&self, g: ArrayView2<f64>) -> Array2<f64> {
        if self.cfg.linearized_mode {
            return Array2::zeros(g.raw_dim());
        }
        let v = &self.model.velocity;
        v.q.quadratic_rows(&v.l, g) / self.model.epsilon
    }

    /// Collision substep over dt: ∂_t g = −(1/ε²)Lg + (1/ε)Q(g, g).
    pub fn collide(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let dt = self.cfg.dt;
        match &self.prop {
            Propagator::Resolvent(m) => {
                if self.cfg.linearized_mode {
                    return g.dot(m);
                }
                let src = self.collision_source(g);
                (&g + &(src * dt)).dot(m)
            }
            Propagator::Exponential { e, phi1, phi2 } => {
                if self.cfg.linearized_mode {
                    return g.dot(e);
                }
                let n0 = self.collision_source(g);
                let a = g.dot(e) + n0.dot(phi1) * dt;
                let n1 = self.collision_source(a.view());
                a + (n1 - n0).dot(phi2) * dt
            }
        }
    }

    /// Applies f(L) (the collision propagator without sources).
    fn collide_linear(&self, g: ArrayView2<f64>) -> Array2<f64> {
        match &self.prop {
            Propagator::Resolvent(m) => g.dot(m),
            Propagator::Exponential { e, .. } => g.dot(e),
        }
    }

    /// Transport and field substep over t by classical RK4.
    pub fn transport(&self, g: ArrayView2<f64>, t: f64) -> Array2<f64> {
        let m = &self.model;
        let k1 = self.streaming.rhs(m, g);
        let y = &g + &(&k1 * (0.5 * t));
        let k2 = self.streaming.rhs(m, y.view());
        let y = &g + &(&k2 * (0.5 * t));
        let k3 = self.streaming.rhs(m, y.view());
        let y = &g + &(&k3 * t);
        let k4 = self.streaming.rhs(m, y.view());
        let mut out = g.to_owned();
        out.scaled_add(t / 6.0, &k1);
        out.scaled_add(t / 3.0, &k2);
        out.scaled_add(t / 3.0, &k3);
        out.scaled_add(t / 6.0, &k4);
        out
    }

    /// Full semi-discrete time derivative of g at a state.
    pub fn time_derivative(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let m = &self.model;
        let eps2 = m.epsilon * m.epsilon;
        let v = &m.velocity;
        let mut out = self.streaming.rhs(m, g);
        out -= &(v.l.apply_rows(g) / eps2);
        out += &self.collision_source(g);
        out
    }

    /// Field terms plus collision source, the explicit part of the Picard scheme.
    fn picard_source(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let field = self.rhs_parts(g, Parts { stream: false, forcing: true, product: true });
        field + self.collision_source(g)
    }

    /// Selected terms of the transport/field right-hand side.
    pub fn rhs_parts(&self, g: ArrayView2<f64>, parts: Parts) -> Array2<f64> {
        self.streaming.rhs_parts(&self.model, g, parts)
    }

    /// (1/ε)Q(g, g) as used by the scheme (zero in linearized mode).
    pub fn source(&self, g: ArrayView2<f64>) -> Array2<f64> {
        self.collision_source(g)
    }

    fn linear_flow(&self, g: ArrayView2<f64>) -> Array2<f64> {
        let half = 0.5 * self.cfg.dt;
        let a = self.streaming.free_stream(&self.model, g, half);
        let b = self.collide_linear(a.view());
        self.streaming.free_stream(&self.model, b.view(), half)
    }

    fn discrete_norm(&self, g: ArrayView2<f64>) -> f64 {
        let w = self.model.quad().weights();
        let cv = self.model.grid.cell_volume();
        let s: f64 = g.outer_iter().map(|r| r.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>()).sum();
        (s * cv).sqrt()
    }

    /// Picard iteration within one step: free streaming and L are propagated
    /// exactly by Φ (Strang-split), the field terms and Q are frozen at the
    /// previous iterate, g^{k+1} = Φ(gⁿ + dt/2·N(gⁿ)) + dt/2·N(g^k).
    pub fn picard_solve(&mut self, state: &KineticState) -> Result<KineticState> {
        let dt = self.cfg.dt;
        let g0 = state.g.view();
        let n0 = self.picard_source(g0);
        let base = self.linear_flow((&g0 + &(&n0 * (0.5 * dt))).view());
        let mut cur = self.linear_flow((&g0 + &(&n0 * dt)).view());
        let mut history = Vec::new();
        loop {
            let next = &base + &(self.picard_source(cur.view()) * (0.5 * dt));
            let inc = self.discrete_norm((&next - &cur).view());
            history.push(inc);
            cur = next;
            if inc <= self.cfg.picard_tol {
                break;
            }
            if history.len() >= self.cfg.picard_max_iters || !inc.is_finite() {
                return Err(Error::Picard { history });
            }
        }
        self.last.picard_increments = history;
        self.finish(cur, state.time + dt)
    }

    fn finish(&mut self, g: Array2<f64>, time: f64) -> Result<KineticState> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite distribution at t = {time}")));
        }
        let eps = self.model.epsilon;
        let min = g.iter().fold(f64::INFINITY, |m, &x| m.min(1.0 + eps * x));
        let violations = g.iter().filter(|&&x| 1.0 + eps * x < 0.0).count();
        self.last.min_positivity = min;
        self.last.positivity_violations = violations;
        if violations > 0 && self.cfg.positivity == PositivityPolicy::Fail {
            return Err(Error::Numerical(format!(
                "M(1 + εg) < 0 at {violations} nodes at t = {time} (min 1 + εg = {min:e})"
            )));
        }
        self.model.state(g, time)
    }

    /// One time step with the configured scheme.
    pub fn step(&mut self, state: &KineticState) -> Result<KineticState> {
        if state.g.dim() != (self.model.grid.len(), self.model.velocity.len()) {
            return Err(Error::Structure("state does not match the solver's grids".into()));
        }
        match self.cfg.scheme {
            Scheme::Picard => self.picard_solve(state),
            Scheme::ImexStrang => {
                self.last.picard_increments.clear();
                let half = 0.5 * self.cfg.dt;
                let a = self.transport(state.g.view(), half);
                let b = self.collide(a.view());
                let c = self.transport(b.view(), half);
                self.finish(c, state.time + self.cfg.dt)
            }
        }
    }
}
