//! Energies with cheap single-coordinate deltas.

pub mod brockett;
pub mod generic;
pub mod rayleigh;
pub mod tv;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use brockett::{brockett_delta_cached, brockett_diag_error, generator_angle, BrockettProblem};
pub use generic::ManifoldObjective;
pub use rayleigh::{RayleighCache, RayleighProblem};
pub use tv::{neighbors, TvConfig, TvProblem};

use crate::engine::{EngineError, SweepObjective};

/// Relative disagreement between an incremental and a recomputed delta,
/// `|d_inc − d_full| / max(|d_full|, 1e−6 (1 + |V|))`.
pub fn delta_discrepancy(incremental: f64, full: f64, value: f64) -> f64 {
    (incremental - full).abs() / full.abs().max(1e-6 * (1.0 + value.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeltaAudit {
    pub checked: usize,
    pub worst: f64,
    /// Largest `|d_inc − d_full|`.
    pub worst_absolute: f64,
    /// `(coordinate, α)` of the worst probe.
    pub worst_at: Option<(usize, f64)>,
}

/// Wraps an objective and re-checks every `stride`-th delta probe against
/// two full energy evaluations.
pub struct AuditedObjective<'a, P: SweepObjective> {
    inner: &'a P,
    stride: usize,
    probes: AtomicUsize,
    audit: Mutex<DeltaAudit>,
}

impl<'a, P: SweepObjective> AuditedObjective<'a, P> {
    pub fn new(inner: &'a P, stride: usize) -> Self {
        AuditedObjective {
            inner,
            stride: stride.max(1),
            probes: AtomicUsize::new(0),
            audit: Mutex::new(DeltaAudit::default()),
        }
    }

    pub fn audit(&self) -> DeltaAudit {
        *self.audit.lock().unwrap()
    }
}

impl<P: SweepObjective> SweepObjective for AuditedObjective<'_, P> {
    type Point = P::Point;
    type State = P::State;

    fn dim(&self, u: &P::Point) -> usize {
        self.inner.dim(u)
    }

    fn energy(&self, u: &P::Point) -> Result<f64, EngineError> {
        self.inner.energy(u)
    }

    fn begin(&self, center: &P::Point) -> Result<P::State, EngineError> {
        self.inner.begin(center)
    }

    fn prepare(&self, state: &mut P::State, j: usize) -> Result<(), EngineError> {
        self.inner.prepare(state, j)
    }

    fn delta(&self, state: &P::State, j: usize, alpha: f64) -> Result<f64, EngineError> {
        let d = self.inner.delta(state, j, alpha)?;
        if self.probes.fetch_add(1, Ordering::Relaxed).is_multiple_of(self.stride) {
            let v = self.inner.energy(&self.inner.current(state))?;
            let full = self.inner.energy(&self.inner.trial(state, j, alpha)?)? - v;
            let err = delta_discrepancy(d, full, v);
            let mut a = self.audit.lock().unwrap();
            a.checked += 1;
            a.worst_absolute = a.worst_absolute.max((d - full).abs());
            if err > a.worst || a.worst_at.is_none() {
                a.worst = err.max(a.worst);
                a.worst_at = Some((j, alpha));
            }
        }
        Ok(d)
    }

    fn commit(&self, state: &mut P::State, j: usize, alpha: f64) -> Result<(), EngineError> {
        self.inner.commit(state, j, alpha)
    }

    fn finish(&self, state: P::State) -> P::Point {
        self.inner.finish(state)
    }

    fn current(&self, state: &P::State) -> P::Point {
        self.inner.current(state)
    }

    fn trial(&self, state: &P::State, j: usize, alpha: f64) -> Result<P::Point, EngineError> {
        self.inner.trial(state, j, alpha)
    }
}
