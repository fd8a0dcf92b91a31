//! The (m−1)-sphere in spherical coordinates.
//!
//! The chart `θ ∈ R^{m−1}` is treated as a flat manifold with the additive
//! retraction `φ_θ(η) = θ + η`; the sphere enters only through
//! [`spherical_embed`]. A single-coordinate change `θ_l → θ_l + α` rescales
//! the embedded vector by `c_l` at index `l` and by `s_l` past it, which is
//! what makes the incremental Rayleigh delta cheap.

use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{GeometryError, Manifold, TangentCoords};

/// Guard on `|sin θ_l|` and `|cos θ_l|` below which the ratio factors are not formed.
pub const POLE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub theta: Vec<f64>,
}

impl SpherePoint {
    pub fn new(theta: Vec<f64>) -> Self {
        SpherePoint { theta }
    }

    /// Ambient dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.theta.len() + 1
    }
}

/// Unit vector `u(θ) ∈ R^m`:
/// `u_1 = cos θ_1`, `u_r = cos θ_r ∏_{i<r} sin θ_i`, `u_m = ∏ sin θ_i`.
pub fn spherical_embed(theta: &[f64]) -> Vec<f64> {
    let m = theta.len() + 1;
    let mut u = Vec::with_capacity(m);
    let mut prod = 1.0;
    for &t in theta {
        u.push(prod * t.cos());
        prod *= t.sin();
    }
    u.push(prod);
    u
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("coordinate {index} is within {guard:e} of a pole (sin={sin:e}, cos={cos:e})")]
pub struct NearPole {
    pub index: usize,
    pub sin: f64,
    pub cos: f64,
    pub guard: f64,
}

/// Ratio factors for the update `θ_l → θ_l + α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateFactors {
    pub c: f64,
    pub s: f64,
    /// `κ_1..κ_5 = c−1, s−1, sc−1, s²−1, c²−1`.
    pub kappa: [f64; 5],
}

/// `c_l = cos(θ_l+α)/cos θ_l`, `s_l = sin(θ_l+α)/sin θ_l` and the κ's.
///
/// The differences are formed with angle-addition identities so that small
/// `α` does not lose digits to cancellation.
pub fn sphere_update_factors(theta: &[f64], l: usize, alpha: f64) -> Result<UpdateFactors, NearPole> {
    let (sin_t, cos_t) = theta[l].sin_cos();
    if sin_t.abs() <= POLE_GUARD || cos_t.abs() <= POLE_GUARD {
        return Err(NearPole {
            index: l,
            sin: sin_t,
            cos: cos_t,
            guard: POLE_GUARD,
        });
    }
    let sin_a = alpha.sin();
    // cos(a) − 1 = −2 sin²(a/2)
    let cos_a_m1 = -2.0 * (0.5 * alpha).sin().powi(2);
    let tan_t = sin_t / cos_t;
    // c = cos a − tan θ sin a,  s = cos a + cot θ sin a
    let k1 = cos_a_m1 - tan_t * sin_a;
    let k2 = cos_a_m1 + sin_a / tan_t;
    let c = 1.0 + k1;
    let s = 1.0 + k2;
    let k3 = k1 + k2 + k1 * k2;
    let k4 = k2 * (2.0 + k2);
    let k5 = k1 * (2.0 + k1);
    Ok(UpdateFactors {
        c,
        s,
        kappa: [k1, k2, k3, k4, k5],
    })
}

/// Flat chart of `S^{m−1}` in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereChart {
    /// Ambient dimension.
    pub m: usize,
}

impl SphereChart {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "sphere needs ambient dimension >= 2");
        SphereChart { m }
    }
}

impl Manifold for SphereChart {
    type Point = SpherePoint;

    fn dim(&self, _p: &SpherePoint) -> usize {
        self.m - 1
    }

    fn retract(&self, p: &SpherePoint, v: &[f64]) -> Result<SpherePoint, GeometryError> {
        if v.len() != p.theta.len() {
            return Err(GeometryError::Dimension {
                expected: p.theta.len(),
                got: v.len(),
            });
        }
        Ok(SpherePoint::new(p.theta.iter().zip(v).map(|(a, b)| a + b).collect()))
    }

    fn inverse_retract(&self, c: &SpherePoint, q: &SpherePoint) -> Result<TangentCoords, GeometryError> {
        Ok(q.theta
            .iter()
            .zip(&c.theta)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
            .into())
    }

    fn inner(&self, _p: &SpherePoint, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn distance(&self, p: &SpherePoint, q: &SpherePoint) -> Result<f64, GeometryError> {
        Ok(p.theta
            .iter()
            .zip(&q.theta)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn embed(&self, p: &SpherePoint) -> Vec<f64> {
        p.theta.clone()
    }

    fn embed_tangent(&self, _p: &SpherePoint, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> SpherePoint {
        SpherePoint::new((0..self.m - 1).map(|_| rng.random_range(0.0..PI)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded_rng;

    #[test]
    fn embed_two_dimensional() {
        let u = spherical_embed(&[PI / 3.0]);
        assert!((u[0] - 0.5).abs() < 1e-15);
        assert!((u[1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn embed_pole_kills_tail() {
        let u = spherical_embed(&[0.0, 1.234]);
        assert_eq!(u, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn embed_unit_norm_matches_direct_products() {
        let mut rng = seeded_rng(10);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-4.0..4.0)).collect();
            let u = spherical_embed(&theta);
            let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            // direct evaluation of each component
            for r in 0..10 {
                let mut direct: f64 = (0..r.min(9)).map(|i| theta[i].sin()).product();
                if r < 9 {
                    direct *= theta[r].cos();
                }
                assert!((u[r] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn factors_zero_step() {
        let f = sphere_update_factors(&[0.7, 1.1], 1, 0.0).unwrap();
        assert_eq!(f.kappa, [0.0; 5]);
        assert_eq!((f.c, f.s), (1.0, 1.0));
    }

    #[test]
    fn factors_exact_quarter_turn() {
        let f = sphere_update_factors(&[PI / 4.0], 0, PI / 4.0).unwrap();
        assert!(f.c.abs() < 1e-15);
        assert!((f.s - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.kappa[4] + 1.0).abs() < 1e-15);
        assert!((f.kappa[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn factors_match_direct_ratios() {
        let mut rng = seeded_rng(11);
        for _ in 0..200 {
            let t: f64 = rng.random_range(0.1..3.0);
            let a: f64 = rng.random_range(-2.0..2.0);
            if (t.cos()).abs() < 0.05 {
                continue;
            }
            let f = sphere_update_factors(&[t], 0, a).unwrap();
            assert!((f.c - (t + a).cos() / t.cos()).abs() < 1e-12 * (1.0 + f.c.abs()));
            assert!((f.s - (t + a).sin() / t.sin()).abs() < 1e-12 * (1.0 + f.s.abs()));
            assert!((f.kappa[2] - (f.s * f.c - 1.0)).abs() < 1e-12 * (1.0 + f.kappa[2].abs()));
        }
    }

    #[test]
    fn pole_guard_trips() {
        assert!(sphere_update_factors(&[0.0], 0, 0.3).is_err());
        assert!(sphere_update_factors(&[PI / 2.0], 0, 0.3).is_err());
    }
}
