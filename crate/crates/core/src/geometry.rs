//! Manifold contract shared by every backend, plus generic checks of the
//! retraction, metric and distance axioms.
//!
//! Tangent vectors are always carried as coefficient vectors in a fixed
//! per-point basis `{E_l}`; each backend supplies the map from coefficients to
//! its embedded representation so the checks below can work with plain
//! finite differences.

use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Central-difference step used by the retraction checks, relative to point scale.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("linear solve failed (singular system)")]
    SingularSolve,
    #[error("symmetric eigensolver did not converge")]
    EigenFailure,
    #[error("point outside the inverse-retraction domain: {0}")]
    Domain(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Coefficients of a tangent vector in the basis `{E_l}` at some base point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TangentCoords(Vec<f64>);

impl TangentCoords {
    pub fn new(coeffs: Vec<f64>) -> Self {
        TangentCoords(coeffs)
    }

    pub fn zeros(n: usize) -> Self {
        TangentCoords(vec![0.0; n])
    }

    /// Unit coefficient vector `e_l`.
    pub fn unit(n: usize, l: usize) -> Self {
        let mut v = vec![0.0; n];
        v[l] = 1.0;
        TangentCoords(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentCoords(self.0.iter().map(|x| x * s).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TangentCoords {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for TangentCoords {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for TangentCoords {
    fn from(v: Vec<f64>) -> Self {
        TangentCoords(v)
    }
}

/// A Riemannian manifold together with a retraction and a tangent basis.
///
/// All methods are pure; implementors must be shareable across threads.
pub trait Manifold: Sync {
    type Point: Clone + Send + Sync;

    /// Dimension of the tangent space at `p`.
    fn dim(&self, p: &Self::Point) -> usize;

    /// `φ_p(v)`. Must return `p` unchanged for `v = 0`.
    fn retract(&self, p: &Self::Point, v: &[f64]) -> Result<Self::Point, GeometryError>;

    /// `φ_c^{-1}(q)`, defined for `q` near `c`.
    fn inverse_retract(&self, center: &Self::Point, q: &Self::Point) -> Result<TangentCoords, GeometryError>;

    /// `g_p(x, y)` for coefficient vectors `x`, `y`.
    fn inner(&self, p: &Self::Point, x: &[f64], y: &[f64]) -> f64;

    fn norm(&self, p: &Self::Point, x: &[f64]) -> f64 {
        self.inner(p, x, x).max(0.0).sqrt()
    }

    /// Geodesic (or chart) distance.
    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64, GeometryError>;

    /// Trust radius of the retraction in the `g_p` norm.
    fn domain_radius(&self, _p: &Self::Point) -> f64 {
        f64::INFINITY
    }

    /// Flattened embedded representation of a point.
    fn embed(&self, p: &Self::Point) -> Vec<f64>;

    /// Embedded representation of the tangent vector with coefficients `v` at `p`.
    fn embed_tangent(&self, p: &Self::Point, v: &[f64]) -> Vec<f64>;

    /// Sample a valid point.
    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Self::Point;

    /// Gram matrix `G_lm = g_p(E_l, E_m)` of the tangent basis.
    fn gram(&self, p: &Self::Point) -> DMatrix<f64> {
        let n = self.dim(p);
        let basis: Vec<TangentCoords> = (0..n).map(|l| TangentCoords::unit(n, l)).collect();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.inner(p, &basis[i], &basis[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Raise an index: coefficients of the vector `x` with `g_p(x, E_l) = covector_l`.
    fn sharp(&self, p: &Self::Point, covector: &[f64]) -> Result<TangentCoords, GeometryError> {
        let g = self.gram(p);
        let rhs = DVector::from_column_slice(covector);
        let sol = g
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(GeometryError::SingularSolve)?;
        Ok(TangentCoords::new(sol.iter().copied().collect()))
    }
}

/// Standard-normal coefficient vector.
pub fn random_tangent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TangentCoords {
    TangentCoords::new((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Outcome of [`verify_retraction_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetractionReport {
    /// `φ_p(0) = p` (bit-for-bit or within 1e-15 in the embedding).
    pub zero_ok: bool,
    /// Finite-difference Jacobian of `φ_p` at 0 matches the basis embedding.
    pub identity_ok: bool,
    /// `φ_p^{-1} ∘ φ_p` is the identity on sampled small tangents.
    pub roundtrip_ok: bool,
}

impl RetractionReport {
    pub fn all(&self) -> bool {
        self.zero_ok && self.identity_ok && self.roundtrip_ok
    }
}

/// Check the retraction axioms at `p`. Never aborts; failures are flags.
pub fn verify_retraction_axioms<M: Manifold>(
    m: &M,
    p: &M::Point,
    tolerance: f64,
    rng: &mut dyn rand::RngCore,
) -> RetractionReport {
    let n = m.dim(p);
    let base = m.embed(p);
    let scale = max_abs(&base);

    let zero_ok = match m.retract(p, &vec![0.0; n]) {
        Ok(q) => {
            let e = m.embed(&q);
            e.iter()
                .zip(&base)
                .all(|(a, b)| a == b || (a - b).abs() <= 1e-15 * (1.0 + scale))
        }
        Err(_) => false,
    };

    let h = FD_STEP * (1.0 + scale);
    let mut identity_ok = true;
    for l in 0..n {
        let mut plus = vec![0.0; n];
        plus[l] = h;
        let minus: Vec<f64> = plus.iter().map(|x| -x).collect();
        let (qp, qm) = match (m.retract(p, &plus), m.retract(p, &minus)) {
            (Ok(a), Ok(b)) => (m.embed(&a), m.embed(&b)),
            _ => {
                identity_ok = false;
                break;
            }
        };
        let column = m.embed_tangent(p, &TangentCoords::unit(n, l));
        let ok = qp
            .iter()
            .zip(&qm)
            .zip(&column)
            .all(|((a, b), c)| ((a - b) / (2.0 * h) - c).abs() <= tolerance * (1.0 + c.abs()));
        if !ok {
            identity_ok = false;
            break;
        }
    }

    let radius = m.domain_radius(p);
    let target = if radius.is_finite() {
        0.25 * radius.min(1.0)
    } else {
        0.25
    };
    let mut roundtrip_ok = true;
    for _ in 0..8 {
        let dir = random_tangent(n, rng);
        let len = m.norm(p, &dir);
        if len == 0.0 {
            continue;
        }
        let v = dir.scaled(target / len);
        let back = m.retract(p, &v).and_then(|q| m.inverse_retract(p, &q));
        match back {
            Ok(w) => {
                let err = diff_norm(&w, &v);
                if err > tolerance * (1.0 + max_abs(&v)) {
                    roundtrip_ok = false;
                }
            }
            Err(_) => roundtrip_ok = false,
        }
    }

    RetractionReport {
        zero_ok,
        identity_ok,
        roundtrip_ok,
    }
}

/// `|g(x,y) − g(y,x)| ≤ 1e-12·(1+|g(x,y)|)` on `trials` random pairs.
pub fn verify_metric_symmetry<M: Manifold>(m: &M, p: &M::Point, trials: usize, rng: &mut dyn rand::RngCore) -> bool {
    let n = m.dim(p);
    (0..trials).all(|_| {
        let x = random_tangent(n, rng);
        let y = random_tangent(n, rng);
        let a = m.inner(p, &x, &y);
        let b = m.inner(p, &y, &x);
        (a - b).abs() <= 1e-12 * (1.0 + a.abs())
    })
}

/// `g_p(x, x) > 0` for `trials` random nonzero `x`.
pub fn verify_metric_positive<M: Manifold>(m: &M, p: &M::Point, trials: usize, rng: &mut dyn rand::RngCore) -> bool {
    let n = m.dim(p);
    (0..trials).all(|_| {
        let x = random_tangent(n, rng);
        max_abs(&x) == 0.0 || m.inner(p, &x, &x) > 0.0
    })
}

/// Bilinearity `g(ax + by, z) = a g(x,z) + b g(y,z)` on random triples.
pub fn verify_metric_bilinear<M: Manifold>(m: &M, p: &M::Point, trials: usize, rng: &mut dyn rand::RngCore) -> bool {
    let n = m.dim(p);
    (0..trials).all(|_| {
        let x = random_tangent(n, rng);
        let y = random_tangent(n, rng);
        let z = random_tangent(n, rng);
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let comb: Vec<f64> = x.iter().zip(y.iter()).map(|(u, v)| a * u + b * v).collect();
        let lhs = m.inner(p, &comb, &z);
        let rhs = a * m.inner(p, &x, &z) + b * m.inner(p, &y, &z);
        (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs().max(rhs.abs()))
    })
}

/// Identity, symmetry and triangle inequality of the distance on one triple.
pub fn verify_distance_axioms<M: Manifold>(
    m: &M,
    p: &M::Point,
    q: &M::Point,
    r: &M::Point,
) -> Result<bool, GeometryError> {
    let pp = m.distance(p, p)?;
    let pq = m.distance(p, q)?;
    let qp = m.distance(q, p)?;
    let qr = m.distance(q, r)?;
    let pr = m.distance(p, r)?;
    let scale = 1.0 + pq.max(qr).max(pr);
    Ok(pp.abs() <= 1e-12 * scale && pq >= 0.0 && (pq - qp).abs() <= 1e-10 * scale && pr <= pq + qr + 1e-12 * scale)
}

/// Observed order `p` in `‖φ_p(hv) − p − h·v‖ = O(h^p)` over the given steps.
///
/// Returns `+∞` when every error is at roundoff level (the retraction is
/// affine in the embedding, so the remainder vanishes identically).
pub fn retraction_tangency_order<M: Manifold>(
    m: &M,
    p: &M::Point,
    v: &[f64],
    steps: &[f64],
) -> Result<f64, GeometryError> {
    let base = m.embed(p);
    let tangent = m.embed_tangent(p, v);
    let scale = 1.0 + max_abs(&base);
    let mut errs = Vec::with_capacity(steps.len());
    for &h in steps {
        let hv: Vec<f64> = v.iter().map(|x| x * h).collect();
        let q = m.embed(&m.retract(p, &hv)?);
        let err = q
            .iter()
            .zip(&base)
            .zip(&tangent)
            .map(|((a, b), t)| (a - b - h * t).powi(2))
            .sum::<f64>()
            .sqrt();
        errs.push(err);
    }
    if errs.iter().all(|&e| e <= 1e-13 * scale) {
        return Ok(f64::INFINITY);
    }
    let mut worst = f64::INFINITY;
    for i in 1..steps.len() {
        let (e0, e1) = (errs[i - 1], errs[i]);
        if e1 <= 1e-14 * scale {
            continue;
        }
        let order = (e0 / e1).ln() / (steps[i - 1] / steps[i]).ln();
        worst = worst.min(order);
    }
    Ok(worst)
}

/// `|d(p, φ_p(v)) − ‖v‖_p|`; zero for the Riemannian exponential on a
/// normal neighbourhood.
pub fn radial_isometry_gap<M: Manifold>(m: &M, p: &M::Point, v: &[f64]) -> Result<f64, GeometryError> {
    let q = m.retract(p, v)?;
    Ok((m.distance(p, &q)? - m.norm(p, v)).abs())
}
