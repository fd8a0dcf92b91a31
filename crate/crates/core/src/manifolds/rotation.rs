//! SO(m) with the trace metric and Cayley / exponential retractions.
//!
//! Tangent vectors at `Q` are left translates `Q·B` with `B ∈ so(m)`, carried
//! as coefficients in the orthonormal basis `(e_i e_jᵀ − e_j e_iᵀ)/√2`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, Manifold, TangentCoords};
use crate::linalg::random_rotation;

/// `cayley` refuses skew inputs with Frobenius norm at or above this.
pub const CAYLEY_RADIUS: f64 = 1e6;

/// Orthogonal matrix with unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationPoint(DMatrix<f64>);

impl RotationPoint {
    /// Validates `QᵀQ = I` (1e-10 Frobenius) and `det Q = +1` (1e-8).
    pub fn new(q: DMatrix<f64>) -> Result<Self, GeometryError> {
        if !q.is_square() {
            return Err(GeometryError::InvalidPoint("rotation must be square".into()));
        }
        let m = q.nrows();
        let drift = (q.transpose() * &q - DMatrix::identity(m, m)).norm();
        if drift > 1e-10 {
            return Err(GeometryError::InvalidPoint(format!(
                "not orthogonal: |QᵀQ − I|_F = {drift:e}"
            )));
        }
        let det = q.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(GeometryError::InvalidPoint(format!("det = {det}")));
        }
        Ok(RotationPoint(q))
    }

    /// Skips validation; for values produced by retractions of valid points.
    pub fn new_unchecked(q: DMatrix<f64>) -> Self {
        RotationPoint(q)
    }

    pub fn identity(m: usize) -> Self {
        RotationPoint(DMatrix::identity(m, m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    /// `‖QᵀQ − I‖_F`.
    pub fn orthogonality_drift(&self) -> f64 {
        let m = self.order();
        (self.0.transpose() * &self.0 - DMatrix::identity(m, m)).norm()
    }
}

/// Index pairs `(i, j)`, `i < j`, in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewBasis {
    m: usize,
    pairs: Vec<(usize, usize)>,
}

impl SkewBasis {
    pub fn new(m: usize) -> Self {
        let pairs = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        SkewBasis { m, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, l: usize) -> (usize, usize) {
        self.pairs[l]
    }

    /// `Σ v_l E_l` as a dense skew matrix.
    pub fn to_matrix(&self, v: &[f64]) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.m, self.m);
        for (&(i, j), &c) in self.pairs.iter().zip(v) {
            b[(i, j)] += c / SQRT_2;
            b[(j, i)] -= c / SQRT_2;
        }
        b
    }

    /// Coefficients `⟨B, E_l⟩_F` of (the skew part of) `b`.
    pub fn coefficients(&self, b: &DMatrix<f64>) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j)| (b[(i, j)] - b[(j, i)]) / SQRT_2)
            .collect()
    }
}

/// Cayley transform `(I − B)^{-1}(I + B)`.
pub fn cayley(b: &DMatrix<f64>) -> Result<DMatrix<f64>, GeometryError> {
    let m = b.nrows();
    if b.norm() >= CAYLEY_RADIUS {
        return Err(GeometryError::Domain(format!(
            "|B|_F = {:e} beyond the Cayley guard",
            b.norm()
        )));
    }
    let eye = DMatrix::<f64>::identity(m, m);
    (&eye - b).lu().solve(&(&eye + b)).ok_or(GeometryError::SingularSolve)
}

/// `(R + I)^{-1}(R − I)`, the inverse Cayley transform.
fn inverse_cayley(r: &DMatrix<f64>) -> Result<DMatrix<f64>, GeometryError> {
    let m = r.nrows();
    let eye = DMatrix::<f64>::identity(m, m);
    (r + &eye).lu().solve(&(r - &eye)).ok_or(GeometryError::SingularSolve)
}

/// `log R = 2·artanh(Y)` with `Y` the inverse Cayley transform of `R`.
fn rotation_log_near_identity(r: &DMatrix<f64>) -> Result<DMatrix<f64>, GeometryError> {
    let y = inverse_cayley(r)?;
    let y2 = &y * &y;
    let mut power = y.clone();
    let mut sum = y.clone();
    for k in 1..400 {
        power = &power * &y2;
        let term = &power / (2 * k + 1) as f64;
        let tn = term.norm();
        sum += term;
        if tn <= 1e-17 * (1.0 + sum.norm()) {
            return Ok(sum * 2.0);
        }
        if !tn.is_finite() || tn > 1e6 {
            break;
        }
    }
    Err(GeometryError::Domain(
        "rotation too far from the center for the log series".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoRetraction {
    /// `Q·cay(B/2)`; the half makes the differential at 0 the identity.
    #[default]
    Cayley,
    /// `Q·exp(B)`, the Riemannian exponential of the trace metric.
    Exp,
}

impl std::str::FromStr for SoRetraction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cayley" => Ok(SoRetraction::Cayley),
            "exp" => Ok(SoRetraction::Exp),
            other => Err(format!("unknown retraction `{other}` (cayley|exp)")),
        }
    }
}

/// `Q·cay(B(v)/2)` or `Q·exp(B(v))`.
pub fn so_retract(
    q: &RotationPoint,
    v: &[f64],
    basis: &SkewBasis,
    mode: SoRetraction,
) -> Result<RotationPoint, GeometryError> {
    if v.len() != basis.len() {
        return Err(GeometryError::Dimension {
            expected: basis.len(),
            got: v.len(),
        });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Ok(q.clone());
    }
    let b = basis.to_matrix(v);
    let step = match mode {
        SoRetraction::Cayley => cayley(&(b * 0.5))?,
        SoRetraction::Exp => b.exp(),
    };
    Ok(RotationPoint(q.matrix() * step))
}

/// SO(m) backend.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialOrthogonal {
    pub mode: SoRetraction,
    basis: SkewBasis,
}

impl SpecialOrthogonal {
    pub fn new(m: usize, mode: SoRetraction) -> Self {
        SpecialOrthogonal {
            mode,
            basis: SkewBasis::new(m),
        }
    }

    pub fn basis(&self) -> &SkewBasis {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }
}

impl Manifold for SpecialOrthogonal {
    type Point = RotationPoint;

    fn dim(&self, _p: &RotationPoint) -> usize {
        self.basis.len()
    }

    fn retract(&self, p: &RotationPoint, v: &[f64]) -> Result<RotationPoint, GeometryError> {
        so_retract(p, v, &self.basis, self.mode)
    }

    fn inverse_retract(&self, c: &RotationPoint, q: &RotationPoint) -> Result<TangentCoords, GeometryError> {
        let r = c.matrix().transpose() * q.matrix();
        let b = match self.mode {
            SoRetraction::Cayley => inverse_cayley(&r)? * 2.0,
            SoRetraction::Exp => rotation_log_near_identity(&r)?,
        };
        Ok(self.basis.coefficients(&b).into())
    }

    fn inner(&self, _p: &RotationPoint, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `sqrt(Σ θ_k²)` over the eigenvalue arguments `e^{±iθ_k}` of `PᵀQ`.
    ///
    /// For orthogonal `R` the symmetric part `S` and skew part `K` commute;
    /// on each eigenvector `v` of `S`, `cos θ = vᵀSv` and `sin θ = ‖Kv‖`,
    /// and `atan2` keeps small angles accurate. (The general Schur
    /// iteration can stall on orthogonal input.)
    fn distance(&self, p: &RotationPoint, q: &RotationPoint) -> Result<f64, GeometryError> {
        let r = p.matrix().transpose() * q.matrix();
        let s = (&r + r.transpose()) * 0.5;
        let k = (&r - r.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10_000).ok_or(GeometryError::EigenFailure)?;
        let sum: f64 = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .map(|(c, v)| (&k * v).norm().atan2(*c).powi(2))
            .sum();
        if !sum.is_finite() {
            return Err(GeometryError::EigenFailure);
        }
        Ok(sum.sqrt())
    }

    fn domain_radius(&self, _p: &RotationPoint) -> f64 {
        match self.mode {
            SoRetraction::Cayley => f64::INFINITY,
            SoRetraction::Exp => 1.0,
        }
    }

    fn embed(&self, p: &RotationPoint) -> Vec<f64> {
        p.matrix().as_slice().to_vec()
    }

    fn embed_tangent(&self, p: &RotationPoint, v: &[f64]) -> Vec<f64> {
        (p.matrix() * self.basis.to_matrix(v)).as_slice().to_vec()
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> RotationPoint {
        RotationPoint(random_rotation(self.order(), rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_tangent;
    use crate::linalg::seeded_rng;

    fn plane(b: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0])
    }

    #[test]
    fn cayley_zero_is_identity() {
        let c = cayley(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(c, DMatrix::identity(4, 4));
    }

    #[test]
    fn cayley_planar_angle() {
        for b in [0.1, 0.7, -1.3, 5.0] {
            let r = cayley(&plane(b)).unwrap();
            let t = 2.0 * f64::atan(b);
            let expect = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert!((r - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn cayley_random_orthogonal() {
        let mut rng = seeded_rng(21);
        let basis = SkewBasis::new(7);
        for _ in 0..50 {
            let v = random_tangent(basis.len(), &mut rng);
            let r = cayley(&basis.to_matrix(&v)).unwrap();
            let drift = (r.transpose() * &r - DMatrix::identity(7, 7)).norm();
            assert!(drift < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn skew_basis_orthonormal() {
        let basis = SkewBasis::new(5);
        assert_eq!(basis.len(), 10);
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let ea = basis.to_matrix(&crate::geometry::TangentCoords::unit(10, a));
                let eb = basis.to_matrix(&crate::geometry::TangentCoords::unit(10, b));
                let ip = (ea.transpose() * eb).trace();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn retract_zero_is_exact() {
        let mut rng = seeded_rng(22);
        let so = SpecialOrthogonal::new(4, SoRetraction::Cayley);
        let q = so.random_point(&mut rng);
        assert_eq!(so.retract(&q, &[0.0; 6]).unwrap(), q);
    }

    #[test]
    fn single_coefficient_is_plane_rotation() {
        let so_exp = SpecialOrthogonal::new(3, SoRetraction::Exp);
        let so_cay = SpecialOrthogonal::new(3, SoRetraction::Cayley);
        let id = RotationPoint::identity(3);
        let alpha = 0.4;
        // coefficient on the (0, 2) generator
        let v = [0.0, alpha, 0.0];
        let t_exp = alpha / SQRT_2;
        let t_cay = 2.0 * (alpha / (2.0 * SQRT_2)).atan();
        for (so, t) in [(so_exp, t_exp), (so_cay, t_cay)] {
            let r = so.retract(&id, &v).unwrap();
            let m = r.matrix();
            assert!((m[(0, 0)] - t.cos()).abs() < 1e-14);
            assert!((m[(0, 2)] - t.sin()).abs() < 1e-14);
            assert!((m[(2, 0)] + t.sin()).abs() < 1e-14);
            assert!((m[(1, 1)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_and_cayley_agree_to_third_order() {
        let mut rng = seeded_rng(23);
        let so_exp = SpecialOrthogonal::new(4, SoRetraction::Exp);
        let so_cay = SpecialOrthogonal::new(4, SoRetraction::Cayley);
        let q = so_exp.random_point(&mut rng);
        let v = random_tangent(6, &mut rng);
        let gap = |h: f64| {
            let hv = v.scaled(h);
            (so_exp.retract(&q, &hv).unwrap().into_matrix() - so_cay.retract(&q, &hv).unwrap().into_matrix()).norm()
        };
        let (g1, g2) = (gap(1e-2), gap(1e-3));
        let order = (g1 / g2).log10();
        assert!(order > 2.8, "observed order {order}");
    }

    #[test]
    fn inverse_roundtrip_both_modes() {
        let mut rng = seeded_rng(24);
        for mode in [SoRetraction::Cayley, SoRetraction::Exp] {
            let so = SpecialOrthogonal::new(5, mode);
            let q = so.random_point(&mut rng);
            let v = random_tangent(10, &mut rng).scaled(0.2);
            let back = so.inverse_retract(&q, &so.retract(&q, &v).unwrap()).unwrap();
            for (a, b) in back.iter().zip(v.iter()) {
                assert!((a - b).abs() < 1e-12, "{mode:?}");
            }
        }
    }

    #[test]
    fn exp_distance_is_coefficient_norm() {
        let mut rng = seeded_rng(25);
        let so = SpecialOrthogonal::new(4, SoRetraction::Exp);
        let q = so.random_point(&mut rng);
        let v = random_tangent(6, &mut rng).scaled(0.3);
        let r = so.retract(&q, &v).unwrap();
        let d = so.distance(&q, &r).unwrap();
        assert!((d - so.norm(&q, &v)).abs() < 1e-10);
    }

    #[test]
    fn rejects_reflections() {
        let mut refl = DMatrix::<f64>::identity(3, 3);
        refl[(0, 0)] = -1.0;
        assert!(RotationPoint::new(refl).is_err());
    }
}
