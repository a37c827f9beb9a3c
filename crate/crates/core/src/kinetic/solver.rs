use nalgebra::{DMatrix, DVector};

use super::{AssembledOperators, KineticState};
use crate::error::{config, Result};
use crate::linalg::CheckedLu;

/// Relative residual required of every implicit solve.
pub const SOLVE_TOLERANCE: f64 = 1e-11;

/// Backward Euler on `ε M ∂_t g + (A + B + D − C − Q/ε) g = 0`, with the field
/// evaluated at the new time level.
pub struct KineticSolver {
    ops: AssembledOperators,
    dt: f64,
    lu: Option<CheckedLu>,
}

/// States at `t = 0, dt, 2 dt, …`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<KineticState>,
}

impl KineticSolver {
    pub fn new(ops: AssembledOperators, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { ops, dt, lu: None })
    }

    pub fn ops(&self) -> &AssembledOperators {
        &self.ops
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn factor(&mut self, t_new: f64) -> Result<&CheckedLu> {
        let stale = self.lu.is_none() || (self.ops.field_is_time_dependent() && self.ops.time != t_new);
        if stale {
            self.ops.set_time(t_new);
            let scale = self.ops.epsilon / self.dt;
            let system = &(&self.ops.mass * scale) + &self.ops.spatial_operator();
            self.lu = Some(CheckedLu::new(DMatrix::from(&system))?);
        }
        Ok(self.lu.as_ref().unwrap())
    }

    pub fn step(&mut self, state: &KineticState) -> Result<KineticState> {
        if state.g.len() != self.ops.spaces.dim() {
            return Err(config("state does not match the assembled spaces"));
        }
        let t_new = state.t + self.dt;
        let scale = self.ops.epsilon / self.dt;
        let rhs: DVector<f64> = (&self.ops.mass * &state.g) * scale;
        let lu = self.factor(t_new)?;
        let g = lu.solve(&rhs, SOLVE_TOLERANCE)?;
        Ok(KineticState { g, epsilon: state.epsilon, beta: state.beta, t: t_new })
    }

    pub fn run(&mut self, initial: KineticState, n_steps: usize) -> Result<Trajectory> {
        let mut states = Vec::with_capacity(n_steps + 1);
        states.push(initial);
        for _ in 0..n_steps {
            let next = self.step(states.last().unwrap())?;
            states.push(next);
        }
        Ok(Trajectory { dt: self.dt, states })
    }
}
