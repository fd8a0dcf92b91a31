//! Any manifold plus any energy, evaluated without incremental tricks.

use crate::engine::{EngineError, SweepObjective};
use crate::geometry::Manifold;

/// Sweeps a closure energy over a [`Manifold`] using its own retraction.
///
/// Every delta costs two full energy evaluations' worth of work; use it as a
/// reference or for small problems.
#[derive(Debug, Clone)]
pub struct ManifoldObjective<M, F> {
    pub manifold: M,
    pub energy: F,
}

impl<M, F> ManifoldObjective<M, F>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64 + Sync,
{
    pub fn new(manifold: M, energy: F) -> Self {
        ManifoldObjective { manifold, energy }
    }

    fn eval(&self, p: &M::Point) -> Result<f64, EngineError> {
        let v = (self.energy)(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EngineError::Evaluation { alpha: 0.0, value: v })
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenericState<P> {
    center: P,
    eta: Vec<f64>,
    current: P,
    value: f64,
}

impl<M, F> SweepObjective for ManifoldObjective<M, F>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64 + Sync,
{
    type Point = M::Point;
    type State = GenericState<M::Point>;

    fn dim(&self, u: &M::Point) -> usize {
        self.manifold.dim(u)
    }

    fn energy(&self, u: &M::Point) -> Result<f64, EngineError> {
        self.eval(u)
    }

    fn begin(&self, center: &M::Point) -> Result<Self::State, EngineError> {
        Ok(GenericState {
            center: center.clone(),
            eta: vec![0.0; self.manifold.dim(center)],
            current: center.clone(),
            value: self.eval(center)?,
        })
    }

    fn delta(&self, state: &Self::State, j: usize, alpha: f64) -> Result<f64, EngineError> {
        Ok(self.eval(&self.trial(state, j, alpha)?)? - state.value)
    }

    fn commit(&self, state: &mut Self::State, j: usize, alpha: f64) -> Result<(), EngineError> {
        state.eta[j] += alpha;
        state.current = self.manifold.retract(&state.center, &state.eta)?;
        state.value = self.eval(&state.current)?;
        Ok(())
    }

    fn finish(&self, state: Self::State) -> M::Point {
        state.current
    }

    fn current(&self, state: &Self::State) -> M::Point {
        state.current.clone()
    }

    fn trial(&self, state: &Self::State, j: usize, alpha: f64) -> Result<M::Point, EngineError> {
        let mut eta = state.eta.clone();
        eta[j] += alpha;
        Ok(self.manifold.retract(&state.center, &eta)?)
    }
}
