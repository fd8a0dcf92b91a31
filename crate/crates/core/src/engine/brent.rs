//! Scalar bracketing and Brent–Dekker root finding.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RootError {
    #[error("no sign change in [{a}, {b}]")]
    NoBracket { a: f64, b: f64 },
    #[error("root finder exceeded {0} evaluations")]
    MaxEvalExceeded(usize),
}

/// Converged root plus bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Brent–Dekker on a sign-change bracket `[a, b]`.
///
/// Stops when `|f(x)| ≤ ftol` or the bracket half-width falls below
/// `xtol·(1+|x|)`. `f` is only evaluated strictly inside or on `[a, b]`.
/// `fa`, `fb` are the (already known) endpoint values.
#[allow(clippy::too_many_arguments)]
pub fn brent_dekker<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    ftol: f64,
    max_eval: usize,
) -> Result<Result<Root, RootError>, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(Ok(Root {
            x: a,
            fx: fa,
            evaluations: 0,
        }));
    }
    if fb == 0.0 {
        return Ok(Ok(Root {
            x: b,
            fx: fb,
            evaluations: 0,
        }));
    }
    if fa.signum() == fb.signum() {
        return Ok(Err(RootError::NoBracket { a, b }));
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut evals = 0;
    loop {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol * (1.0 + b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= ftol {
            return Ok(Ok(Root {
                x: b,
                fx: fb,
                evaluations: evals,
            }));
        }
        if evals >= max_eval {
            return Ok(Err(RootError::MaxEvalExceeded(max_eval)));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        evals += 1;
    }
}

/// `(a, f(a), b, f(b), evaluations)` of a sign-change bracket.
pub type Bracket = (f64, f64, f64, f64, usize);

/// Geometric search for a sign change starting at `guess`, stepping in
/// `direction` (`±1`).
///
/// Returns `(a, fa, b, fb, evaluations)` where `a` is the last point on the
/// starting side.
pub fn expand_bracket<F, E>(
    mut f: F,
    guess: f64,
    direction: f64,
    growth: f64,
    max_expand: usize,
) -> Result<Result<Bracket, RootError>, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut a = guess;
    let mut fa = f(a)?;
    let mut evals = 1;
    if fa == 0.0 {
        return Ok(Ok((a, fa, a, fa, evals)));
    }
    let mut step = if guess == 0.0 { 1.0 } else { guess.abs() };
    for _ in 0..max_expand {
        let b = a + direction * step;
        let fb = f(b)?;
        evals += 1;
        if fb == 0.0 || fb.signum() != fa.signum() {
            return Ok(Ok((a, fa, b, fb, evals)));
        }
        a = b;
        fa = fb;
        step *= growth;
    }
    Ok(Err(RootError::NoBracket { a: guess, b: a }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded_rng;
    use rand::Rng;
    use std::convert::Infallible;

    fn solve(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Root {
        brent_dekker::<_, Infallible>(|x| Ok(f(x)), a, b, f(a), f(b), 1e-14, 1e-14, 200)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn linear_root() {
        let r = solve(|x| x - 2.0, 0.0, 5.0);
        assert!((r.x - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_root_in_bracket() {
        let r = solve(|x| x * x * x - x, 0.5, 2.0);
        assert!((r.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_cubics_vs_bisection() {
        let mut rng = seeded_rng(70);
        let mut done = 0;
        while done < 100 {
            let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let f = |x: f64| ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
            let (a, b) = (rng.random_range(-4.0..0.0), rng.random_range(0.0..4.0));
            if f(a).signum() == f(b).signum() {
                continue;
            }
            let mut evaluated = Vec::new();
            let r = brent_dekker::<_, Infallible>(
                |x| {
                    evaluated.push(x);
                    Ok(f(x))
                },
                a,
                b,
                f(a),
                f(b),
                1e-15,
                1e-12,
                200,
            )
            .unwrap()
            .unwrap();
            assert!(f(r.x).abs() <= 1e-12 || r.evaluations < 200);
            assert!(evaluated.iter().all(|&x| x >= a && x <= b));
            // bisection oracle: the bracket found must contain the Brent root
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == f(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // same root or another genuine root
            assert!((r.x - lo).abs() < 1e-9 || f(r.x).abs() <= 1e-12);
            done += 1;
        }
    }

    #[test]
    fn rejects_missing_sign_change() {
        let r = brent_dekker::<_, Infallible>(|x| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12, 1e-12, 50).unwrap();
        assert!(matches!(r, Err(RootError::NoBracket { .. })));
    }

    #[test]
    fn max_eval_reported() {
        let r = brent_dekker::<_, Infallible>(|x| Ok(x.powi(5) - 0.3), 0.0, 1.0, -0.3, 0.7, 0.0, 0.0, 1).unwrap();
        assert!(matches!(r, Err(RootError::MaxEvalExceeded(1))));
    }

    #[test]
    fn expansion_examples() {
        let (a, _, b, _, _) = expand_bracket::<_, Infallible>(|x| Ok(x - 2.0), 0.0, 1.0, 2.0, 60)
            .unwrap()
            .unwrap();
        assert!(a <= 2.0 && 2.0 <= b);
        let (a, _, b, _, _) = expand_bracket::<_, Infallible>(|x| Ok(x + 5.0), -0.1, -1.0, 2.0, 60)
            .unwrap()
            .unwrap();
        assert!(b <= -5.0 && -5.0 <= a);
        let flat = expand_bracket::<_, Infallible>(|_| Ok(1.0), 0.1, 1.0, 2.0, 60).unwrap();
        assert!(matches!(flat, Err(RootError::NoBracket { .. })));
    }
}
