//! One Itoh–Abe sweep over all coordinates with the center fixed at `u^k`.

use super::coordinate::{solve_coordinate, CoordOutcome, CoordStatus, SolverConfig};
use super::{EngineConfig, EngineError};

/// An energy together with an incremental evaluator for single-coordinate moves.
///
/// A sweep calls `begin(u^k)` and then, for `j = 0..n`, `prepare(j)`, any
/// number of `delta(j, α)` probes and, for accepted steps, `commit(j, α)`.
/// `delta` is `V(w_{j−1} ⊕ αE_j) − V(w_{j−1})` where `w_{j−1}` is the point
/// after the first `j` committed coordinates and `⊕` is the retraction
/// centred at `u^k`.
pub trait SweepObjective: Sync {
    type Point: Clone + Send + Sync;
    type State: Send;

    fn dim(&self, u: &Self::Point) -> usize;

    fn energy(&self, u: &Self::Point) -> Result<f64, EngineError>;

    fn begin(&self, center: &Self::Point) -> Result<Self::State, EngineError>;

    /// Called once before the probes of coordinate `j`, in increasing `j`.
    fn prepare(&self, _state: &mut Self::State, _j: usize) -> Result<(), EngineError> {
        Ok(())
    }

    fn delta(&self, state: &Self::State, j: usize, alpha: f64) -> Result<f64, EngineError>;

    fn commit(&self, state: &mut Self::State, j: usize, alpha: f64) -> Result<(), EngineError>;

    fn finish(&self, state: Self::State) -> Self::Point;

    /// The point `w` the state currently represents.
    fn current(&self, state: &Self::State) -> Self::Point;

    /// The point `delta(state, j, alpha)` compares against [`current`](Self::current).
    fn trial(&self, state: &Self::State, j: usize, alpha: f64) -> Result<Self::Point, EngineError>;

    /// One full sweep. Problems with a coloured or otherwise reordered
    /// sweep override this; the default is the plain sequential order.
    fn sweep(
        &self,
        u: &Self::Point,
        tau: f64,
        cfg: &EngineConfig,
        warm: Option<&[f64]>,
    ) -> Result<(Self::Point, SweepStats), EngineError> {
        itoh_abe_sweep(self, u, tau, &cfg.solver, warm)
    }
}

/// Per-sweep bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepStats {
    pub tau: f64,
    /// Accepted step per coordinate, indexed by coordinate.
    pub alphas: Vec<f64>,
    /// Energy change per coordinate as reported by the delta evaluator.
    pub deltas: Vec<f64>,
    pub evaluations: usize,
    /// Coordinates left unchanged because they were flat.
    pub flat: usize,
    /// Coordinates left unchanged because bracketing or the solve failed.
    pub failed: usize,
}

impl SweepStats {
    pub fn new(n: usize, tau: f64) -> Self {
        SweepStats {
            tau,
            alphas: vec![0.0; n],
            deltas: vec![0.0; n],
            ..Default::default()
        }
    }

    pub fn record(&mut self, j: usize, out: &CoordOutcome) {
        self.alphas[j] = out.alpha;
        self.deltas[j] = out.delta;
        self.evaluations += out.evaluations;
        match out.status {
            CoordStatus::Solved => {}
            CoordStatus::Flat => self.flat += 1,
            CoordStatus::NoBracket | CoordStatus::MaxEval | CoordStatus::Rejected => self.failed += 1,
        }
    }

    /// `Σ_j (α_j/τ)²`.
    pub fn dgnorm2(&self) -> f64 {
        self.alphas.iter().map(|a| (a / self.tau).powi(2)).sum()
    }

    /// `Σ_j δ_j`, the predicted energy change of the sweep.
    pub fn predicted_change(&self) -> f64 {
        self.deltas.iter().sum()
    }

    pub fn skipped(&self) -> usize {
        self.flat + self.failed
    }

    /// Every step was zero: the sweep returned its input.
    pub fn stationary(&self) -> bool {
        self.alphas.iter().all(|&a| a == 0.0)
    }
}

/// Sequential sweep `j = 0..n`.
pub fn itoh_abe_sweep<P: SweepObjective + ?Sized>(
    problem: &P,
    u: &P::Point,
    tau: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<(P::Point, SweepStats), EngineError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(EngineError::InvalidConfig(format!("step size {tau} must be positive")));
    }
    let n = problem.dim(u);
    let mut stats = SweepStats::new(n, tau);
    let mut state = problem.begin(u)?;
    for j in 0..n {
        problem.prepare(&mut state, j)?;
        let hint = warm.and_then(|w| w.get(j).copied());
        let out = solve_coordinate(|a| problem.delta(&state, j, a), tau, cfg, hint).map_err(|e| e.at_coordinate(j))?;
        if out.alpha != 0.0 {
            problem.commit(&mut state, j, out.alpha)?;
        }
        stats.record(j, &out);
    }
    Ok((problem.finish(state), stats))
}
