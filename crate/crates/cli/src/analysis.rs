//! Convergence-rate estimates from optimality-error curves.

use serde::Serialize;

use drg_core::linalg::fit_line;

/// A least-squares fit over iterations `first..=last` (1-based `k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub first: usize,
    pub last: usize,
    pub slope: f64,
    pub r_squared: f64,
}

/// Fits `log e_k ≈ a + b·k` (linear convergence, `e_k ~ ρ^k` with
/// `ρ = exp(b)`) over the second half of the iterations whose error is still
/// above `floor`; below it the curve is roundoff, not convergence.
pub fn linear_rate(errors: &[f64], floor: f64) -> Option<RateFit> {
    let n = errors.iter().position(|&e| !(e > floor)).unwrap_or(errors.len());
    fit_window(errors, n / 2, n, |k| k as f64)
}

/// Fits `log e_k ≈ a + p·log k` over the second half of the first `horizon`
/// iterations; `p` is the algebraic rate (`−1` for O(1/k), `−2` for O(1/k²)).
pub fn tail_slope(errors: &[f64], horizon: usize) -> Option<RateFit> {
    let n = horizon.min(errors.len());
    fit_window(errors, n / 2, n, |k| (k as f64).ln())
}

fn fit_window(errors: &[f64], lo: usize, hi: usize, x: impl Fn(usize) -> f64) -> Option<RateFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..hi)
        .filter(|&i| errors[i] > 0.0)
        .map(|i| (x(i + 1), errors[i].ln()))
        .unzip();
    let fit = fit_line(&xs, &ys)?;
    Some(RateFit {
        first: lo + 1,
        last: hi,
        slope: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// First 1-based iteration whose error is at or below `threshold`.
pub fn first_below(errors: &[f64], threshold: f64) -> Option<usize> {
    errors.iter().position(|&e| e <= threshold).map(|i| i + 1)
}
