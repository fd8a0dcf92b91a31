//! Outer loop: schedule, stopping rules and logging.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::log::{ConvergenceLog, LogRow};
use super::schedule::StepSchedule;
use super::sweep::{SweepObjective, SweepStats};
use super::{EngineConfig, EngineError};

/// Termination bounds; any subset may be set but at least one must be finite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `(V(u^{k−1}) − V(u^k)) / |V(u^0)| < rel_tol`.
    pub rel_tol: Option<f64>,
    /// Stop once `V(u^{k−1}) − V(u^k) ≤ abs_tol`.
    pub abs_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_wall_ms: Option<f64>,
}

impl StopRule {
    pub fn iterations(n: usize) -> Self {
        StopRule {
            max_iters: Some(n),
            ..Default::default()
        }
    }

    pub fn relative(tol: f64, max_iters: usize) -> Self {
        StopRule {
            rel_tol: Some(tol),
            max_iters: Some(max_iters),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let any = self.rel_tol.is_some()
            || self.abs_tol.is_some()
            || self.max_iters.is_some()
            || self.max_wall_ms.is_some_and(f64::is_finite);
        if !any {
            return Err(EngineError::InvalidConfig("stop rule has no finite bound".into()));
        }
        for t in [self.rel_tol, self.abs_tol].into_iter().flatten() {
            if !(t >= 0.0) {
                return Err(EngineError::InvalidConfig(format!("tolerance {t} must be >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RelTol,
    AbsTol,
    MaxIters,
    MaxWall,
    /// A sweep left every coordinate unchanged.
    Stationary,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::RelTol => "rel_tol",
            StopReason::AbsTol => "abs_tol",
            StopReason::MaxIters => "max_iters",
            StopReason::MaxWall => "max_wall",
            StopReason::Stationary => "stationary",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<P> {
    pub point: P,
    pub log: ConvergenceLog,
    pub reason: StopReason,
    /// Coordinates skipped over the whole run.
    pub skipped: usize,
    pub evaluations: usize,
}

impl<P> RunOutcome<P> {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }
}

/// A run that failed part-way; carries what was computed so far.
#[derive(Debug, Clone)]
pub struct RunFailure<P> {
    pub error: EngineError,
    pub point: P,
    pub log: ConvergenceLog,
}

/// Per-iteration callback: iteration `k`, the new iterate, its log row and sweep stats.
pub type Observer<'a, P> = dyn FnMut(&P, &LogRow, &SweepStats) + 'a;

/// [`run_with`] without an observer.
pub fn run<P: SweepObjective + ?Sized>(
    problem: &P,
    u0: &P::Point,
    schedule: &StepSchedule,
    stop: &StopRule,
    cfg: &EngineConfig,
) -> Result<RunOutcome<P::Point>, Box<RunFailure<P::Point>>> {
    run_with(problem, u0, schedule, stop, cfg, &mut |_, _, _| {})
}

/// Iterate sweeps until a stop rule fires.
pub fn run_with<P: SweepObjective + ?Sized>(
    problem: &P,
    u0: &P::Point,
    schedule: &StepSchedule,
    stop: &StopRule,
    cfg: &EngineConfig,
    observer: &mut Observer<'_, P::Point>,
) -> Result<RunOutcome<P::Point>, Box<RunFailure<P::Point>>> {
    let fail = |error, point: &P::Point, log: &ConvergenceLog| {
        Box::new(RunFailure {
            error,
            point: point.clone(),
            log: log.clone(),
        })
    };
    let empty = ConvergenceLog::new(f64::NAN);
    if let Err(e) = stop.validate() {
        return Err(fail(e, u0, &empty));
    }
    if let Err(e) = schedule.validate() {
        return Err(fail(EngineError::InvalidConfig(e), u0, &empty));
    }
    let v0 = match problem.energy(u0) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, u0, &empty)),
    };
    let start = Instant::now();
    let mut log = ConvergenceLog::new(v0);
    let mut u = u0.clone();
    let mut v_prev = v0;
    let mut warm: Option<Vec<f64>> = None;
    let mut skipped = 0;
    let mut evaluations = 0;
    let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };

    let reason = loop {
        let k = log.len();
        if stop.max_iters.is_some_and(|m| k >= m) {
            break StopReason::MaxIters;
        }
        if stop
            .max_wall_ms
            .is_some_and(|m| start.elapsed().as_secs_f64() * 1e3 >= m)
        {
            break StopReason::MaxWall;
        }
        let tau = schedule.tau(k);
        let (next, stats) = match problem.sweep(&u, tau, cfg, warm.as_deref()) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, &u, &log)),
        };
        skipped += stats.skipped();
        evaluations += stats.evaluations;
        if stats.stationary() {
            break StopReason::Stationary;
        }
        let v = match problem.energy(&next) {
            Ok(v) => v,
            Err(e) => return Err(fail(e, &u, &log)),
        };
        let row = LogRow {
            k: k + 1,
            tau,
            v,
            dv: v - v_prev,
            dgnorm2: stats.dgnorm2(),
            wall_ms: if cfg.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        };
        log.rows.push(row);
        observer(&next, &row, &stats);
        u = next;
        warm = Some(stats.alphas);
        let decrease = v_prev - v;
        v_prev = v;
        if stop.abs_tol.is_some_and(|t| decrease <= t) {
            break StopReason::AbsTol;
        }
        if stop.rel_tol.is_some_and(|t| decrease / scale < t) {
            break StopReason::RelTol;
        }
    };
    Ok(RunOutcome {
        point: u,
        log,
        reason,
        skipped,
        evaluations,
    })
}
