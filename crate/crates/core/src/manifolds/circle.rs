//! The circle S¹ represented by phase angles in `(−π, π]`.

use std::f64::consts::PI;

use rand::Rng;

use crate::geometry::{GeometryError, Manifold, TangentCoords};

const TWO_PI: f64 = 2.0 * PI;

/// Wrap any finite angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TWO_PI) - PI;
    // rem_euclid lands on [−π, π); move the closed end to +π.
    if w <= -PI {
        w + TWO_PI
    } else {
        w
    }
}

/// `|φ − θ|` if that is at most π, else `2π − |φ − θ|`.
pub fn angular_distance(phi: f64, theta: f64) -> f64 {
    let d = (phi - theta).abs();
    if d <= PI {
        d
    } else {
        TWO_PI - d
    }
}

/// Move by `t` along the circle and wrap back into `(−π, π]`.
pub fn circle_retract(phi: f64, t: f64) -> f64 {
    if t == 0.0 {
        return phi;
    }
    wrap_angle(phi + t)
}

/// Signed wrapped difference `θ ⊖ φ ∈ (−π, π]`.
pub fn circle_inverse(phi: f64, theta: f64) -> f64 {
    wrap_angle(theta - phi)
}

/// A phase sample.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PhaseAtom(pub f64);

impl PhaseAtom {
    /// Rejects values outside `(−π, π]` and non-finite input.
    pub fn new(phi: f64) -> Result<Self, GeometryError> {
        if !phi.is_finite() || phi <= -PI || phi > PI {
            return Err(GeometryError::InvalidPoint(format!("phase {phi} outside (-pi, pi]")));
        }
        Ok(PhaseAtom(phi))
    }

    pub fn wrapped(x: f64) -> Self {
        PhaseAtom(wrap_angle(x))
    }

    pub fn phi(self) -> f64 {
        self.0
    }
}

/// S¹ with the flat metric and the mod-2π retraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Circle;

impl Manifold for Circle {
    type Point = PhaseAtom;

    fn dim(&self, _p: &PhaseAtom) -> usize {
        1
    }

    fn retract(&self, p: &PhaseAtom, v: &[f64]) -> Result<PhaseAtom, GeometryError> {
        match v {
            [t] => Ok(PhaseAtom(circle_retract(p.0, *t))),
            _ => Err(GeometryError::Dimension {
                expected: 1,
                got: v.len(),
            }),
        }
    }

    fn inverse_retract(&self, c: &PhaseAtom, q: &PhaseAtom) -> Result<TangentCoords, GeometryError> {
        Ok(vec![circle_inverse(c.0, q.0)].into())
    }

    fn inner(&self, _p: &PhaseAtom, x: &[f64], y: &[f64]) -> f64 {
        x[0] * y[0]
    }

    fn distance(&self, p: &PhaseAtom, q: &PhaseAtom) -> Result<f64, GeometryError> {
        Ok(angular_distance(p.0, q.0))
    }

    fn domain_radius(&self, _p: &PhaseAtom) -> f64 {
        PI
    }

    /// `(cos φ, sin φ)`; the angle itself jumps at the seam.
    fn embed(&self, p: &PhaseAtom) -> Vec<f64> {
        vec![p.0.cos(), p.0.sin()]
    }

    fn embed_tangent(&self, p: &PhaseAtom, v: &[f64]) -> Vec<f64> {
        vec![-p.0.sin() * v[0], p.0.cos() * v[0]]
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> PhaseAtom {
        PhaseAtom::wrapped(rng.random_range(-PI..PI))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded_rng;

    #[test]
    fn distance_examples() {
        assert!((angular_distance(PI / 2.0, -PI / 2.0) - PI).abs() < 1e-15);
        assert!((angular_distance(3.0, -3.0) - (TWO_PI - 6.0)).abs() < 1e-15);
        let mut rng = seeded_rng(30);
        for _ in 0..100 {
            let x = rng.random_range(-PI..PI);
            assert_eq!(angular_distance(x, x), 0.0);
        }
    }

    #[test]
    fn retract_examples() {
        assert_eq!(circle_retract(0.0, 0.0), 0.0);
        assert!((circle_retract(PI, 0.1) - (-PI + 0.1)).abs() < 1e-15);
        assert_eq!(circle_retract(PI, 0.0), PI);
    }

    #[test]
    fn wrap_closed_at_plus_pi() {
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-14);
        for x in [-10.0, -3.5, 0.0, 2.0, 7.0, 100.0] {
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI);
        }
    }

    #[test]
    fn roundtrip_and_periodicity() {
        let mut rng = seeded_rng(31);
        for _ in 0..1000 {
            let phi = rng.random_range(-PI..PI);
            let t = rng.random_range(-3.1..3.1);
            let q = circle_retract(phi, t);
            assert!((circle_inverse(phi, q) - t).abs() < 1e-13);
            let q2 = circle_retract(phi, t + TWO_PI);
            assert!(angular_distance(q, q2) <= 1e-14);
        }
    }

    #[test]
    fn atom_rejects_out_of_range() {
        assert!(PhaseAtom::new(4.0).is_err());
        assert!(PhaseAtom::new(-PI).is_err());
        assert!(PhaseAtom::new(f64::NAN).is_err());
        assert!(PhaseAtom::new(PI).is_ok());
    }
}
