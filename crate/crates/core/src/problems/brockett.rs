//! Brockett trace energy `V(Q) = tr(D QᵀAQ)` on SO(m).
//!
//! Minimizers diagonalize `N = QᵀAQ` with the eigenvalues of `A` in the
//! opposite order to the entries of `D`. The sweep moves along one skew
//! generator `(e_p e_qᵀ − e_q e_pᵀ)/√2` at a time, which right-multiplies
//! `Q` by a plane rotation `G(t)`; under it only the `(p, q)` block of the
//! diagonal of `N` changes:
//!
//! `ΔV = (D_p − D_q)·(sin²t (N_qq − N_pp) − sin 2t · N_pq)`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::engine::{EngineError, SweepObjective};
use crate::geometry::GeometryError;
use crate::linalg::sorted_symmetric_eigen;
use crate::manifolds::{RotationPoint, SkewBasis, SoRetraction};

/// Plane-rotation angle produced by coefficient `alpha` on one generator.
pub fn generator_angle(alpha: f64, mode: SoRetraction) -> f64 {
    match mode {
        SoRetraction::Exp => alpha / SQRT_2,
        // cay(αE/2) with E = J/√2 rotates by 2·atan(α/(2√2)).
        SoRetraction::Cayley => 2.0 * (alpha / (2.0 * SQRT_2)).atan(),
    }
}

/// `ΔV` from the cached `N = QᵀAQ`; O(1).
pub fn brockett_delta_cached(n: &DMatrix<f64>, d: &[f64], (p, q): (usize, usize), t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let s = t.sin();
    (d[p] - d[q]) * (s * s * (n[(q, q)] - n[(p, p)]) - (2.0 * t).sin() * n[(p, q)])
}

/// `Q ← Q·G(t)` and `N ← GᵀNG` for the plane `(p, q)`; O(m).
fn rotate_plane(qm: &mut DMatrix<f64>, n: &mut DMatrix<f64>, (p, q): (usize, usize), t: f64) {
    let (s, c) = t.sin_cos();
    let m = qm.nrows();
    for i in 0..m {
        let (a, b) = (qm[(i, p)], qm[(i, q)]);
        qm[(i, p)] = c * a - s * b;
        qm[(i, q)] = s * a + c * b;
    }
    // columns, then rows
    for i in 0..m {
        let (a, b) = (n[(i, p)], n[(i, q)]);
        n[(i, p)] = c * a - s * b;
        n[(i, q)] = s * a + c * b;
    }
    for j in 0..m {
        let (a, b) = (n[(p, j)], n[(q, j)]);
        n[(p, j)] = c * a - s * b;
        n[(q, j)] = s * a + c * b;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrockettProblem {
    a: DMatrix<f64>,
    d: Vec<f64>,
    pub mode: SoRetraction,
    basis: SkewBasis,
}

impl BrockettProblem {
    /// `D = diag(1, 2, …, m)`.
    pub fn new(a: DMatrix<f64>, mode: SoRetraction) -> Result<Self, GeometryError> {
        let m = a.nrows();
        Self::with_weights(a, (1..=m).map(|i| i as f64).collect(), mode)
    }

    pub fn with_weights(a: DMatrix<f64>, d: Vec<f64>, mode: SoRetraction) -> Result<Self, GeometryError> {
        let m = a.nrows();
        if !a.is_square() || m < 2 || d.len() != m {
            return Err(GeometryError::InvalidPoint(
                "need square A and m weights, m >= 2".into(),
            ));
        }
        let scale = 1.0 + a.amax();
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(GeometryError::InvalidPoint("A is not symmetric".into()));
        }
        let dscale = 1.0 + d.iter().fold(0.0f64, |x, y| x.max(y.abs()));
        for i in 0..m {
            for j in i + 1..m {
                if (d[i] - d[j]).abs() <= 1e-12 * dscale {
                    return Err(GeometryError::InvalidPoint("D entries must be distinct".into()));
                }
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(BrockettProblem {
            a,
            d,
            mode,
            basis: SkewBasis::new(m),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn weights(&self) -> &[f64] {
        &self.d
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn basis(&self) -> &SkewBasis {
        &self.basis
    }

    /// `QᵀAQ`.
    pub fn conjugated(&self, q: &RotationPoint) -> DMatrix<f64> {
        let n = q.matrix().transpose() * &self.a * q.matrix();
        (&n + n.transpose()) * 0.5
    }

    /// `tr(D QᵀAQ) = Σ_i D_i q_iᵀ A q_i`.
    pub fn brockett_energy(&self, q: &RotationPoint) -> f64 {
        let aq = &self.a * q.matrix();
        (0..self.m())
            .map(|i| self.d[i] * q.matrix().column(i).dot(&aq.column(i)))
            .sum()
    }

    /// `V(Q·G_l(α)) − V(Q)` for generator `l`, from `Q` alone (O(m²)).
    pub fn brockett_delta(&self, q: &RotationPoint, l: usize, alpha: f64) -> f64 {
        let (p, r) = self.basis.pair(l);
        let t = generator_angle(alpha, self.mode);
        if t == 0.0 {
            return 0.0;
        }
        let qp = q.matrix().column(p);
        let qr = q.matrix().column(r);
        let aqp = &self.a * qp;
        let aqr = &self.a * qr;
        let (npp, nrr, npr) = (qp.dot(&aqp), qr.dot(&aqr), qp.dot(&aqr));
        let s = t.sin();
        (self.d[p] - self.d[r]) * (s * s * (nrr - npp) - (2.0 * t).sin() * npr)
    }

    /// `Q·G_l(α)`.
    pub fn step(&self, q: &RotationPoint, l: usize, alpha: f64) -> RotationPoint {
        let mut qm = q.matrix().clone();
        let mut n = DMatrix::zeros(self.m(), self.m());
        rotate_plane(&mut qm, &mut n, self.basis.pair(l), generator_angle(alpha, self.mode));
        RotationPoint::new_unchecked(qm)
    }

    /// Eigenvalues of `A` ordered to pair with `D` at the minimum:
    /// the largest eigenvalue sits where `D` is smallest.
    pub fn oracle_spectrum(&self) -> DVector<f64> {
        let (vals, _) = sorted_symmetric_eigen(&self.a);
        let m = self.m();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| self.d[i].total_cmp(&self.d[j]));
        let mut out = DVector::zeros(m);
        for (rank, &i) in order.iter().enumerate() {
            out[i] = vals[m - 1 - rank];
        }
        out
    }

    /// `V* = Σ D_i λ_i` with the oracle pairing.
    pub fn optimal_energy(&self) -> f64 {
        self.oracle_spectrum().iter().zip(&self.d).map(|(l, d)| l * d).sum()
    }
}

/// `‖diag(QᵀAQ) − spectrum‖₂`.
pub fn brockett_diag_error(q: &RotationPoint, a: &DMatrix<f64>, spectrum: &DVector<f64>) -> f64 {
    let n = q.matrix().transpose() * a * q.matrix();
    n.diagonal()
        .iter()
        .zip(spectrum.iter())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Sweep state: the current rotation and `N = QᵀAQ`.
#[derive(Debug, Clone)]
pub struct BrockettState {
    q: DMatrix<f64>,
    n: DMatrix<f64>,
}

impl SweepObjective for BrockettProblem {
    type Point = RotationPoint;
    type State = BrockettState;

    fn dim(&self, _u: &RotationPoint) -> usize {
        self.basis.len()
    }

    fn energy(&self, u: &RotationPoint) -> Result<f64, EngineError> {
        Ok(self.brockett_energy(u))
    }

    fn begin(&self, center: &RotationPoint) -> Result<BrockettState, EngineError> {
        if center.order() != self.m() {
            return Err(GeometryError::Dimension {
                expected: self.m(),
                got: center.order(),
            }
            .into());
        }
        Ok(BrockettState {
            q: center.matrix().clone(),
            n: self.conjugated(center),
        })
    }

    fn delta(&self, state: &BrockettState, j: usize, alpha: f64) -> Result<f64, EngineError> {
        let t = generator_angle(alpha, self.mode);
        Ok(brockett_delta_cached(&state.n, &self.d, self.basis.pair(j), t))
    }

    fn commit(&self, state: &mut BrockettState, j: usize, alpha: f64) -> Result<(), EngineError> {
        let t = generator_angle(alpha, self.mode);
        rotate_plane(&mut state.q, &mut state.n, self.basis.pair(j), t);
        Ok(())
    }

    fn finish(&self, state: BrockettState) -> RotationPoint {
        RotationPoint::new_unchecked(state.q)
    }

    fn current(&self, state: &BrockettState) -> RotationPoint {
        RotationPoint::new_unchecked(state.q.clone())
    }

    fn trial(&self, state: &BrockettState, j: usize, alpha: f64) -> Result<RotationPoint, EngineError> {
        Ok(self.step(&RotationPoint::new_unchecked(state.q.clone()), j, alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_rotation, random_symmetric, seeded_rng};
    use crate::manifolds::{so_retract, SkewBasis};
    use rand::Rng;

    #[test]
    fn energy_at_identity_is_weighted_diagonal() {
        let mut rng = seeded_rng(100);
        let a = random_symmetric(5, &mut rng);
        let p = BrockettProblem::new(a.clone(), SoRetraction::Cayley).unwrap();
        let expect: f64 = (0..5).map(|i| a[(i, i)] * (i + 1) as f64).sum();
        assert!((p.brockett_energy(&RotationPoint::identity(5)) - expect).abs() < 1e-13);
    }

    #[test]
    fn energy_matches_triple_product() {
        let mut rng = seeded_rng(101);
        let a = random_symmetric(6, &mut rng);
        let p = BrockettProblem::new(a.clone(), SoRetraction::Exp).unwrap();
        let q = RotationPoint::new(random_rotation(6, &mut rng)).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(p.weights().to_vec()));
        let naive = (&d * q.matrix().transpose() * &a * q.matrix()).trace();
        assert!((p.brockett_energy(&q) - naive).abs() < 1e-12);
    }

    #[test]
    fn step_equals_generic_retraction() {
        let mut rng = seeded_rng(102);
        let basis = SkewBasis::new(5);
        for mode in [SoRetraction::Cayley, SoRetraction::Exp] {
            let p = BrockettProblem::new(random_symmetric(5, &mut rng), mode).unwrap();
            let q = RotationPoint::new(random_rotation(5, &mut rng)).unwrap();
            for l in 0..basis.len() {
                let alpha = rng.random_range(-2.0..2.0);
                let mut v = vec![0.0; basis.len()];
                v[l] = alpha;
                let generic = so_retract(&q, &v, &basis, mode).unwrap();
                assert!((p.step(&q, l, alpha).matrix() - generic.matrix()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // Q = I, D = diag(1, 2): the delta against a hand-rotated 2×2 block.
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.7, 0.7, -0.4]);
        let p = BrockettProblem::new(a.clone(), SoRetraction::Cayley).unwrap();
        let id = RotationPoint::identity(2);
        for alpha in [0.0, 0.3, -1.1, 4.0] {
            let t = 2.0 * (alpha / (2.0 * SQRT_2)).atan();
            let g = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            let n = g.transpose() * &a * &g;
            let direct = n[(0, 0)] + 2.0 * n[(1, 1)] - (a[(0, 0)] + 2.0 * a[(1, 1)]);
            assert!((p.brockett_delta(&id, 0, alpha) - direct).abs() < 1e-14);
        }
        // spectrum of the 2×2 case in closed form
        let (tr, det) = (a.trace(), a.determinant());
        let disc = (tr * tr / 4.0 - det).sqrt();
        let spectrum = p.oracle_spectrum();
        assert!((spectrum[0] - (tr / 2.0 + disc)).abs() < 1e-12);
        assert!((spectrum[1] - (tr / 2.0 - disc)).abs() < 1e-12);
    }

    #[test]
    fn cached_delta_matches_recompute() {
        let mut rng = seeded_rng(103);
        let p = BrockettProblem::new(random_symmetric(6, &mut rng), SoRetraction::Cayley).unwrap();
        let q = RotationPoint::new(random_rotation(6, &mut rng)).unwrap();
        let mut state = p.begin(&q).unwrap();
        for l in 0..15 {
            let alpha = rng.random_range(-1.0..1.0);
            let cur = p.current(&state);
            let full = p.brockett_energy(&p.step(&cur, l, alpha)) - p.brockett_energy(&cur);
            let inc = p.delta(&state, l, alpha).unwrap();
            assert!((inc - full).abs() < 1e-11, "{inc} vs {full}");
            p.commit(&mut state, l, alpha).unwrap();
        }
        let end = p.finish(state);
        assert!(end.orthogonality_drift() < 1e-13);
    }

    #[test]
    fn diag_error_examples() {
        let mut rng = seeded_rng(104);
        let a = random_symmetric(4, &mut rng);
        let (vals, vecs) = sorted_symmetric_eigen(&a);
        let mut q = vecs.clone();
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        let q = RotationPoint::new(q).unwrap();
        assert!(brockett_diag_error(&q, &a, &vals) < 1e-10);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let spectrum = DVector::from_vec(vec![3.0, 1.0, 2.0]);
        assert_eq!(brockett_diag_error(&RotationPoint::identity(3), &diag, &spectrum), 0.0);
    }
}
