//! The scalar equation of one Itoh–Abe coordinate step.
//!
//! With `δ(α) = V(w_{j−1} ⊕ αE_j) − V(w_{j−1})` the step solves
//! `α = −τ δ(α)/α`. Written as `r(α) = α + τ δ(α)/α = 0` the trivial root at
//! `α = 0` disappears; `r(0)` is the limit `τ·∂_j V`, estimated by a
//! symmetric difference quotient so the method stays derivative-free.

use serde::{Deserialize, Serialize};

use super::brent::{brent_dekker, RootError};
use super::EngineError;

/// Tolerances and limits of the per-coordinate solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Difference-quotient step for `r(0)`.
    pub fd_step: f64,
    /// Coordinates with `|r(0)|` below this are skipped.
    pub skip_tol: f64,
    pub growth: f64,
    pub max_expand: usize,
    pub max_eval: usize,
    /// Bracket width tolerance, relative to `1 + |α|`.
    pub xtol: f64,
    /// Residual tolerance, relative to `1 + |α|`.
    pub ftol: f64,
    /// One-sided quotients differing by more than this fraction count as a kink.
    pub kink_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            fd_step: 1e-7,
            skip_tol: 1e-14,
            growth: 2.0,
            max_expand: 60,
            max_eval: 100,
            xtol: 1e-12,
            ftol: 1e-13,
            kink_ratio: 0.5,
        }
    }
}

/// How a coordinate solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordStatus {
    Solved,
    /// `|r(0)|` below the skip tolerance: stationary along `E_j`.
    Flat,
    NoBracket,
    MaxEval,
    /// The root did not dissipate (`δ > 0`); rejected for safety.
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordOutcome {
    pub alpha: f64,
    /// `δ(α)`; zero when skipped.
    pub delta: f64,
    pub evaluations: usize,
    pub status: CoordStatus,
}

impl CoordOutcome {
    fn skipped(status: CoordStatus, evaluations: usize) -> Self {
        CoordOutcome {
            alpha: 0.0,
            delta: 0.0,
            evaluations,
            status,
        }
    }
}

/// Directional derivative estimate used as `r(0)/τ`.
///
/// Returns 0 when the energy increases in both directions (a minimum at
/// resolution `h`, possibly a kink). When the one-sided slopes share a sign
/// but differ by more than `kink_ratio` (a kink) the smaller magnitude is
/// used; otherwise, including at a maximum along the coordinate, the
/// symmetric quotient.
pub fn directional_estimate(delta_plus: f64, delta_minus: f64, h: f64, kink_ratio: f64) -> f64 {
    let qp = delta_plus / h;
    let qm = -delta_minus / h;
    if delta_plus >= 0.0 && delta_minus >= 0.0 {
        return 0.0;
    }
    if delta_plus < 0.0 && delta_minus < 0.0 {
        return 0.5 * (qp + qm);
    }
    let big = qp.abs().max(qm.abs());
    if (qp - qm).abs() > kink_ratio * big {
        if qp.abs() <= qm.abs() {
            qp
        } else {
            qm
        }
    } else {
        0.5 * (qp + qm)
    }
}

/// `r(α) = α + τ δ(α)/α`, with `r(0)` from [`directional_estimate`].
pub fn coordinate_residual<F>(mut delta: F, alpha: f64, tau: f64, cfg: &SolverConfig) -> Result<f64, EngineError>
where
    F: FnMut(f64) -> Result<f64, EngineError>,
{
    if alpha == 0.0 {
        let h = cfg.fd_step;
        let (dp, dm) = (checked(delta(h)?, h)?, checked(delta(-h)?, -h)?);
        return Ok(tau * directional_estimate(dp, dm, h, cfg.kink_ratio));
    }
    Ok(alpha + tau * checked(delta(alpha)?, alpha)? / alpha)
}

fn checked(value: f64, alpha: f64) -> Result<f64, EngineError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EngineError::Evaluation { alpha, value })
    }
}

/// Solve one coordinate equation.
///
/// `warm` is the previous sweep's step for this coordinate; it seeds the
/// bracket when it points the same way as the current descent direction.
pub fn solve_coordinate<F>(
    mut delta: F,
    tau: f64,
    cfg: &SolverConfig,
    warm: Option<f64>,
) -> Result<CoordOutcome, EngineError>
where
    F: FnMut(f64) -> Result<f64, EngineError>,
{
    let h = cfg.fd_step;
    let dp = checked(delta(h)?, h)?;
    let dm = checked(delta(-h)?, -h)?;
    let mut evals = 2;
    let slope = directional_estimate(dp, dm, h, cfg.kink_ratio);
    let r0 = tau * slope;
    if r0.abs() < cfg.skip_tol {
        return Ok(CoordOutcome::skipped(CoordStatus::Flat, evals));
    }
    let dir = -r0.signum();

    // Every evaluation is remembered so the accepted root reuses its δ.
    let mut seen: Vec<(f64, f64)> = Vec::with_capacity(32);
    let mut r = |a: f64, evals: &mut usize| -> Result<f64, EngineError> {
        let d = checked(delta(a)?, a)?;
        *evals += 1;
        seen.push((a, d));
        Ok(a + tau * d / a)
    };

    let mut guess = -r0;
    if let Some(w) = warm {
        if w != 0.0 && w.signum() == dir && w.is_finite() {
            guess = w;
        }
    }

    // Points on the r < 0 side of the root have sign(r) = −dir.
    let mut inner = guess;
    let mut f_inner = r(inner, &mut evals)?;
    let bracket = if f_inner * dir >= 0.0 {
        // Already past the root: halve toward zero (never onto it).
        let (mut outer, mut f_outer) = (inner, f_inner);
        let mut found = None;
        for _ in 0..cfg.max_expand {
            if f_outer == 0.0 {
                found = Some((outer, f_outer, outer, f_outer));
                break;
            }
            inner = 0.5 * outer;
            f_inner = r(inner, &mut evals)?;
            if f_inner * dir < 0.0 {
                found = Some((inner, f_inner, outer, f_outer));
                break;
            }
            outer = inner;
            f_outer = f_inner;
        }
        found
    } else {
        let mut step = inner.abs();
        let mut found = None;
        for _ in 0..cfg.max_expand {
            let outer = inner + dir * step;
            let f_outer = r(outer, &mut evals)?;
            if f_outer * dir >= 0.0 {
                found = Some((inner, f_inner, outer, f_outer));
                break;
            }
            inner = outer;
            f_inner = f_outer;
            step *= cfg.growth;
        }
        found
    };
    let Some((a, fa, b, fb)) = bracket else {
        return Ok(CoordOutcome::skipped(CoordStatus::NoBracket, evals));
    };

    let root = if a == b {
        Ok(super::brent::Root {
            x: a,
            fx: fa,
            evaluations: 0,
        })
    } else {
        // Residual tolerance scales with the step itself.
        let scale = 1.0 + a.abs().max(b.abs());
        brent_dekker(
            |x| r(x, &mut evals),
            a,
            b,
            fa,
            fb,
            cfg.xtol,
            cfg.ftol * scale,
            cfg.max_eval,
        )?
    };
    let alpha = match root {
        Ok(root) => root.x,
        Err(RootError::MaxEvalExceeded(_)) => return Ok(CoordOutcome::skipped(CoordStatus::MaxEval, evals)),
        Err(RootError::NoBracket { .. }) => return Ok(CoordOutcome::skipped(CoordStatus::NoBracket, evals)),
    };
    let delta_at = seen
        .iter()
        .rev()
        .find(|(a, _)| *a == alpha)
        .map(|&(_, d)| d)
        .expect("accepted root was evaluated");
    if !(delta_at <= 0.0) || alpha == 0.0 {
        return Ok(CoordOutcome::skipped(CoordStatus::Rejected, evals));
    }
    Ok(CoordOutcome {
        alpha,
        delta: delta_at,
        evaluations: evals,
        status: CoordStatus::Solved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(lambda: f64, x: f64) -> impl FnMut(f64) -> Result<f64, EngineError> {
        move |a: f64| Ok(lambda * x * a + 0.5 * lambda * a * a)
    }

    #[test]
    fn flat_energy_gives_identity_residual() {
        let cfg = SolverConfig::default();
        for a in [-2.0, 0.5, 3.0] {
            assert_eq!(coordinate_residual(|_| Ok(0.0), a, 0.1, &cfg).unwrap(), a);
        }
        let out = solve_coordinate(|_| Ok(0.0), 0.1, &cfg, None).unwrap();
        assert_eq!(out.alpha, 0.0);
        assert_eq!(out.status, CoordStatus::Flat);
    }

    #[test]
    fn quadratic_closed_form() {
        // δ(α) = λxα + ½λα²  ⇒  α = −τλx / (1 + τλ/2)
        let cfg = SolverConfig::default();
        for (lambda, x, tau) in [(1.0, 1.0, 0.1), (3.0, -2.0, 10.0), (0.5, 4.0, 1e-3), (2.0, 1e-3, 1.0)] {
            let out = solve_coordinate(quad(lambda, x), tau, &cfg, None).unwrap();
            let expect = -tau * lambda * x / (1.0 + 0.5 * tau * lambda);
            assert!(
                (out.alpha - expect).abs() <= 1e-11 * (1.0 + expect.abs()),
                "{} vs {expect}",
                out.alpha
            );
            assert!(out.delta < 0.0);
        }
    }

    #[test]
    fn residual_at_zero_is_scaled_derivative() {
        let cfg = SolverConfig::default();
        let r0 = coordinate_residual(quad(2.0, 1.5), 0.0, 0.3, &cfg).unwrap();
        assert!((r0 - 0.3 * 3.0).abs() < 1e-6);
    }

    #[test]
    fn residual_sign_for_large_steps() {
        // coercive along the ray: r(α) has the sign of α far out
        let cfg = SolverConfig::default();
        for a in [-1e3, -50.0, 50.0, 1e3] {
            let r = coordinate_residual(quad(1.0, 2.0), a, 0.5, &cfg).unwrap();
            assert_eq!(r.signum(), a.signum());
        }
    }

    #[test]
    fn kink_minimum_is_skipped() {
        let cfg = SolverConfig::default();
        let out = solve_coordinate(|a: f64| Ok(a.abs()), 1.0, &cfg, None).unwrap();
        assert_eq!(out.status, CoordStatus::Flat);
    }

    #[test]
    fn kink_uses_smaller_slope() {
        assert_eq!(directional_estimate(-1e-7, 3e-7, 1e-7, 0.5), -1.0);
        assert_eq!(directional_estimate(-3e-7, 1e-7, 1e-7, 0.5), -1.0);
        let s = directional_estimate(-1e-7, 1.1e-7, 1e-7, 0.5);
        assert!((s + 1.05).abs() < 1e-9);
        // symmetric maximum: no preferred direction
        assert_eq!(directional_estimate(-2e-14, -2e-14, 1e-7, 0.5), 0.0);
    }

    #[test]
    fn warm_start_reaches_same_root() {
        let cfg = SolverConfig::default();
        let cold = solve_coordinate(quad(1.0, 1.0), 2.0, &cfg, None).unwrap();
        let warm = solve_coordinate(quad(1.0, 1.0), 2.0, &cfg, Some(-0.3)).unwrap();
        let past = solve_coordinate(quad(1.0, 1.0), 2.0, &cfg, Some(-40.0)).unwrap();
        assert!((cold.alpha - warm.alpha).abs() < 1e-12);
        assert!((cold.alpha - past.alpha).abs() < 1e-12);
    }

    #[test]
    fn nonfinite_delta_is_an_error() {
        let cfg = SolverConfig::default();
        assert!(solve_coordinate(|_| Ok(f64::NAN), 1.0, &cfg, None).is_err());
    }
}
