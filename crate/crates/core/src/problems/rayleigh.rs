//! Rayleigh quotient `V(u) = uᵀAu` on the sphere in spherical coordinates.
//!
//! Changing `θ_l` by `α` multiplies `u_l` by `c` and every `u_i`, `i > l`,
//! by `s` (see [`sphere_update_factors`]). Splitting `u` into the head
//! `i < l`, the entry `l` and the tail `i > l`, and keeping `q = A·u_head`
//! and `z = A·u_tail`, the energy change is
//!
//! `ΔV = 2κ₁ u_l q_l + 2κ₂ Σ_{i>l} u_i q_i + 2κ₃ u_l z_l + κ₄ Σ_{i>l} u_i z_i + κ₅ u_l² A_ll`.
//!
//! The five sums are formed once per coordinate in O(m), each probe is O(1),
//! and `q`, `z` advance to the next coordinate in O(m).

use nalgebra::{DMatrix, DVector};

use crate::engine::{EngineError, SweepObjective};
use crate::geometry::GeometryError;
use crate::linalg::sorted_symmetric_eigen;
use crate::manifolds::{sphere_update_factors, spherical_embed, SpherePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighProblem {
    a: DMatrix<f64>,
}

impl RayleighProblem {
    /// `A` must be square and symmetric within `1e−12·(1 + max|A_ij|)`.
    pub fn new(a: DMatrix<f64>) -> Result<Self, GeometryError> {
        if !a.is_square() || a.nrows() < 2 {
            return Err(GeometryError::InvalidPoint("A must be square with m >= 2".into()));
        }
        let scale = 1.0 + a.amax();
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(GeometryError::InvalidPoint("A is not symmetric".into()));
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(RayleighProblem { a })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// `u(θ)ᵀ A u(θ)`.
    pub fn rayleigh_energy(&self, theta: &[f64]) -> f64 {
        let u = DVector::from_vec(spherical_embed(theta));
        u.dot(&(&self.a * &u))
    }

    /// Smallest and largest eigenvalue from the dense solver.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let (vals, _) = sorted_symmetric_eigen(&self.a);
        (vals[0], vals[vals.len() - 1])
    }

    /// `V(θ + αE_l) − V(θ)` by two full evaluations.
    pub fn full_delta(&self, theta: &[f64], l: usize, alpha: f64) -> f64 {
        let mut moved = theta.to_vec();
        moved[l] += alpha;
        self.rayleigh_energy(&moved) - self.rayleigh_energy(theta)
    }

    /// Incremental cache positioned at coordinate 0 for the point `theta`.
    pub fn cache(&self, theta: &[f64]) -> RayleighCache {
        let u = spherical_embed(theta);
        let m = u.len();
        let uv = DVector::from_column_slice(&u);
        let au = &self.a * &uv;
        let value = uv.dot(&au);
        let z = au - self.a.column(0) * u[0];
        let mut cache = RayleighCache {
            theta: theta.to_vec(),
            u,
            q: DVector::zeros(m),
            z,
            cursor: 0,
            sums: [0.0; 5],
            value,
        };
        self.load_sums(&mut cache);
        cache
    }

    fn load_sums(&self, c: &mut RayleighCache) {
        let l = c.cursor;
        let ul = c.u[l];
        let (mut s2, mut s4) = (0.0, 0.0);
        for i in l + 1..c.u.len() {
            s2 += c.u[i] * c.q[i];
            s4 += c.u[i] * c.z[i];
        }
        c.sums = [ul * c.q[l], s2, ul * c.z[l], s4, ul * ul * self.a[(l, l)]];
    }

    /// Move the cache to coordinate `l ≥ cursor`.
    pub fn advance(&self, c: &mut RayleighCache, l: usize) {
        debug_assert!(l >= c.cursor);
        while c.cursor < l {
            let k = c.cursor;
            c.q += self.a.column(k) * c.u[k];
            c.z -= self.a.column(k + 1) * c.u[k + 1];
            c.cursor += 1;
        }
        self.load_sums(c);
    }

    /// `ΔV` for `θ_l → θ_l + α` with the cache positioned at `l`.
    ///
    /// Falls back to two full evaluations when `θ_l` is within the pole
    /// guard.
    pub fn rayleigh_delta(&self, c: &RayleighCache, l: usize, alpha: f64) -> f64 {
        debug_assert_eq!(c.cursor, l);
        if alpha == 0.0 {
            return 0.0;
        }
        match sphere_update_factors(&c.theta, l, alpha) {
            Ok(f) => {
                let [k1, k2, k3, k4, k5] = f.kappa;
                let [s1, s2, s3, s4, s5] = c.sums;
                2.0 * (k1 * s1 + k2 * s2 + k3 * s3) + k4 * s4 + k5 * s5
            }
            Err(_) => {
                let mut moved = c.theta.clone();
                moved[l] += alpha;
                self.rayleigh_energy(&moved) - c.value
            }
        }
    }

    /// Apply `θ_l → θ_l + α` to the cache.
    pub fn apply(&self, c: &mut RayleighCache, l: usize, alpha: f64) {
        let delta = self.rayleigh_delta(c, l, alpha);
        match sphere_update_factors(&c.theta, l, alpha) {
            Ok(f) => {
                c.theta[l] += alpha;
                c.u[l] *= f.c;
                for x in &mut c.u[l + 1..] {
                    *x *= f.s;
                }
                c.z *= f.s;
                c.value += delta;
            }
            Err(_) => {
                // Near a pole the ratios are unusable; rebuild at this cursor.
                c.theta[l] += alpha;
                let mut fresh = self.cache(&c.theta);
                self.advance(&mut fresh, l);
                *c = fresh;
            }
        }
        self.load_sums(c);
    }
}

/// Running quantities of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighCache {
    pub theta: Vec<f64>,
    /// `u(θ)`, maintained by rescaling.
    pub u: Vec<f64>,
    /// `A · u_{<l}`.
    q: DVector<f64>,
    /// `A · u_{>l}`.
    z: DVector<f64>,
    cursor: usize,
    sums: [f64; 5],
    /// `V` of the cached point, maintained incrementally.
    pub value: f64,
}

impl RayleighCache {
    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl SweepObjective for RayleighProblem {
    type Point = SpherePoint;
    type State = RayleighCache;

    fn dim(&self, u: &SpherePoint) -> usize {
        u.theta.len()
    }

    fn energy(&self, u: &SpherePoint) -> Result<f64, EngineError> {
        Ok(self.rayleigh_energy(&u.theta))
    }

    fn begin(&self, center: &SpherePoint) -> Result<RayleighCache, EngineError> {
        if center.theta.len() + 1 != self.m() {
            return Err(GeometryError::Dimension {
                expected: self.m() - 1,
                got: center.theta.len(),
            }
            .into());
        }
        if !center.theta.iter().all(|t| t.is_finite()) {
            return Err(GeometryError::InvalidPoint("non-finite angle".into()).into());
        }
        Ok(self.cache(&center.theta))
    }

    fn prepare(&self, state: &mut RayleighCache, j: usize) -> Result<(), EngineError> {
        self.advance(state, j);
        Ok(())
    }

    fn delta(&self, state: &RayleighCache, j: usize, alpha: f64) -> Result<f64, EngineError> {
        Ok(self.rayleigh_delta(state, j, alpha))
    }

    fn commit(&self, state: &mut RayleighCache, j: usize, alpha: f64) -> Result<(), EngineError> {
        self.apply(state, j, alpha);
        Ok(())
    }

    fn finish(&self, state: RayleighCache) -> SpherePoint {
        SpherePoint::new(state.theta)
    }

    fn current(&self, state: &RayleighCache) -> SpherePoint {
        SpherePoint::new(state.theta.clone())
    }

    fn trial(&self, state: &RayleighCache, j: usize, alpha: f64) -> Result<SpherePoint, EngineError> {
        let mut theta = state.theta.clone();
        theta[j] += alpha;
        Ok(SpherePoint::new(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_symmetric, seeded_rng};
    use rand::Rng;

    fn diag123() -> RayleighProblem {
        RayleighProblem::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]))).unwrap()
    }

    #[test]
    fn energy_examples() {
        let eye = RayleighProblem::new(DMatrix::identity(4, 4)).unwrap();
        assert!((eye.rayleigh_energy(&[0.3, 1.2, -2.0]) - 1.0).abs() < 1e-14);
        assert!((diag123().rayleigh_energy(&[0.0, 0.7]) - 1.0).abs() < 1e-15);
        let mut rng = seeded_rng(90);
        let a = random_symmetric(6, &mut rng);
        let p = RayleighProblem::new(a.clone()).unwrap();
        let theta: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..3.0)).collect();
        let u = DVector::from_vec(spherical_embed(&theta));
        assert!((p.rayleigh_energy(&theta) - (u.transpose() * &a * &u)[0]).abs() < 1e-13);
    }

    #[test]
    fn delta_matches_full_difference() {
        let mut rng = seeded_rng(91);
        for m in [3, 7, 12] {
            let p = RayleighProblem::new(random_symmetric(m, &mut rng)).unwrap();
            let theta: Vec<f64> = (0..m - 1).map(|_| rng.random_range(0.1..3.0)).collect();
            let mut c = p.cache(&theta);
            for l in 0..m - 1 {
                p.advance(&mut c, l);
                assert_eq!(p.rayleigh_delta(&c, l, 0.0), 0.0);
                let alpha = rng.random_range(-1.0..1.0);
                let inc = p.rayleigh_delta(&c, l, alpha);
                let full = p.full_delta(&c.theta, l, alpha);
                assert!((inc - full).abs() < 1e-10 * (1.0 + c.value.abs()), "m={m} l={l}");
                p.apply(&mut c, l, alpha);
            }
            // bookkeeping through a full pass
            assert!((c.value - p.rayleigh_energy(&c.theta)).abs() < 1e-9);
            let direct = spherical_embed(&c.theta);
            for (x, y) in c.u.iter().zip(&direct) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pole_falls_back_to_full_evaluation() {
        let p = diag123();
        let mut c = p.cache(&[0.0, 0.4]);
        let d = p.rayleigh_delta(&c, 0, 0.5);
        assert!((d - p.full_delta(&[0.0, 0.4], 0, 0.5)).abs() < 1e-14);
        p.apply(&mut c, 0, 0.5);
        assert!((c.value - p.rayleigh_energy(&[0.5, 0.4])).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let mut a = DMatrix::identity(3, 3);
        a[(0, 1)] = 1.0;
        assert!(RayleighProblem::new(a).is_err());
    }
}
