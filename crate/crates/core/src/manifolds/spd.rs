//! Sym⁺(3) with the affine-invariant metric.
//!
//! Tangent coefficients use the sparse basis `E_ij = e_i e_jᵀ + e_j e_iᵀ`
//! (`i ≤ j`, so `E_ii = 2 e_i e_iᵀ`) in storage order
//! `(11, 12, 13, 22, 23, 33)`. The basis is not `g_A`-orthogonal away from
//! the identity; [`Manifold::gram`] supplies the Gram matrix when needed.

use std::sync::OnceLock;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, Manifold, TangentCoords};
use crate::linalg::random_rotation;

/// Eigenvalue floor for SPD validation.
pub const SPD_FLOOR: f64 = 1e-13;

/// Upper-triangle index pairs in storage order.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Debug, Clone)]
struct SpdCache {
    sqrt: Matrix3<f64>,
    inv_sqrt: Matrix3<f64>,
    inv: Matrix3<f64>,
    eigenvalues: Vector3<f64>,
}

/// A 3×3 SPD matrix stored by its upper triangle, with lazily computed
/// square root, inverse square root and inverse.
#[derive(Debug, Clone)]
pub struct SpdAtom {
    a: [f64; 6],
    cache: OnceLock<SpdCache>,
}

impl PartialEq for SpdAtom {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

fn to_matrix(a: &[f64; 6]) -> Matrix3<f64> {
    Matrix3::new(a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5])
}

fn upper(m: &Matrix3<f64>) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        out[k] = if i == j {
            m[(i, i)]
        } else {
            0.5 * (m[(i, j)] + m[(j, i)])
        };
    }
    out
}

fn symmetric_eigen(m: Matrix3<f64>) -> Result<SymmetricEigen<f64, nalgebra::U3>, GeometryError> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(GeometryError::EigenFailure);
    }
    SymmetricEigen::try_new(m, f64::EPSILON, 1000).ok_or(GeometryError::EigenFailure)
}

/// `V f(Λ) Vᵀ` for a symmetric eigendecomposition.
fn spectral_map(eig: &SymmetricEigen<f64, nalgebra::U3>, f: impl Fn(f64) -> f64) -> Matrix3<f64> {
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(f));
    let v = &eig.eigenvectors;
    v * d * v.transpose()
}

impl SpdAtom {
    /// Validates positive definiteness (eigenvalues above [`SPD_FLOOR`]).
    pub fn new(a: [f64; 6]) -> Result<Self, GeometryError> {
        let atom = SpdAtom::new_unchecked(a);
        atom.validate()?;
        Ok(atom)
    }

    /// Trusts the caller; used for outputs of SPD-preserving maps.
    pub fn new_unchecked(a: [f64; 6]) -> Self {
        SpdAtom {
            a,
            cache: OnceLock::new(),
        }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self, GeometryError> {
        SpdAtom::new(upper(m))
    }

    pub fn identity() -> Self {
        SpdAtom::new_unchecked([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self, GeometryError> {
        SpdAtom::new([d[0], 0.0, 0.0, d[1], 0.0, d[2]])
    }

    pub fn components(&self) -> &[f64; 6] {
        &self.a
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        to_matrix(&self.a)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let eig = symmetric_eigen(self.matrix())?;
        let min = eig.eigenvalues.min();
        if min <= SPD_FLOOR {
            return Err(GeometryError::InvalidPoint(format!(
                "smallest eigenvalue {min:e} not above {SPD_FLOOR:e}"
            )));
        }
        Ok(())
    }

    fn cache(&self) -> &SpdCache {
        self.cache.get_or_init(|| {
            // Valid atoms always decompose; clamp keeps the cache finite otherwise.
            let eig = SymmetricEigen::new(self.matrix());
            let raw = eig.eigenvalues;
            let lam = raw.map(|x| x.max(f64::MIN_POSITIVE));
            let eig = SymmetricEigen {
                eigenvalues: lam,
                eigenvectors: eig.eigenvectors,
            };
            SpdCache {
                sqrt: spectral_map(&eig, f64::sqrt),
                inv_sqrt: spectral_map(&eig, |x| 1.0 / x.sqrt()),
                inv: spectral_map(&eig, |x| 1.0 / x),
                eigenvalues: raw,
            }
        })
    }

    pub fn sqrt(&self) -> Matrix3<f64> {
        self.cache().sqrt
    }

    pub fn inv_sqrt(&self) -> Matrix3<f64> {
        self.cache().inv_sqrt
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        self.cache().inv
    }

    pub fn eigenvalues(&self) -> Vector3<f64> {
        self.cache().eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }
}

/// Symmetric matrix `Σ v_k E_k` for sparse-basis coefficients.
pub fn sym_from_coeffs(v: &[f64]) -> Matrix3<f64> {
    let mut y = Matrix3::zeros();
    for (&(i, j), &c) in SYM_PAIRS.iter().zip(v) {
        if i == j {
            y[(i, i)] += 2.0 * c;
        } else {
            y[(i, j)] += c;
            y[(j, i)] += c;
        }
    }
    y
}

/// Sparse-basis coefficients of a symmetric matrix.
pub fn coeffs_from_sym(y: &Matrix3<f64>) -> [f64; 6] {
    let mut v = upper(y);
    v[0] *= 0.5;
    v[3] *= 0.5;
    v[5] *= 0.5;
    v
}

/// `g_A(X, Y) = tr(A^{-1} X A^{-1} Y)`.
pub fn spd_metric(a: &SpdAtom, x: &Matrix3<f64>, y: &Matrix3<f64>) -> f64 {
    let inv = a.inverse();
    (inv * x * inv * y).trace()
}

/// `sqrt(Σ log² κ_i)` with `κ` the eigenvalues of `A^{-1/2} B A^{-1/2}`.
///
/// Uses the Cholesky factor of `A` (`L^{-1} B L^{-T}` is similar to
/// `A^{-1/2} B A^{-1/2}`), which avoids an eigendecomposition of `A`.
pub fn spd_distance(a: &SpdAtom, b: &SpdAtom) -> Result<f64, GeometryError> {
    let chol = a.matrix().cholesky().ok_or(GeometryError::EigenFailure)?;
    let l = chol.l();
    let linv = l
        .solve_lower_triangular(&Matrix3::identity())
        .ok_or(GeometryError::SingularSolve)?;
    let m = linv * b.matrix() * linv.transpose();
    let m = (m + m.transpose()) * 0.5;
    if !m.iter().all(|x| x.is_finite()) {
        return Err(GeometryError::EigenFailure);
    }
    let kappa = m.symmetric_eigenvalues();
    let mut sum = 0.0;
    for k in kappa.iter() {
        if *k <= 0.0 {
            return Err(GeometryError::EigenFailure);
        }
        sum += k.ln().powi(2);
    }
    Ok(sum.sqrt())
}

/// `A + Y + ½ Y A^{-1} Y`, SPD for every symmetric `Y`.
pub fn spd_retract(a: &SpdAtom, y: &Matrix3<f64>) -> SpdAtom {
    if y.iter().all(|&x| x == 0.0) {
        return a.clone();
    }
    let am = a.matrix();
    let r = SpdAtom::new_unchecked(upper(&(am + y + y * a.inverse() * y * 0.5)));
    if r.min_eigenvalue() > 0.0 {
        // The direct form keeps entries outside the support of Y bit-exact.
        return r;
    }
    // Very large steps cancel in the direct form. ½(A+Y)A⁻¹(A+Y) + ½A is the
    // same map as PSD plus SPD, which keeps the ½A floor.
    let b = am + y;
    let r = (b * a.inverse() * b + am) * 0.5;
    SpdAtom::new_unchecked(upper(&((r + r.transpose()) * 0.5)))
}

/// `A^{1/2} exp(A^{-1/2} Y A^{-1/2}) A^{1/2}`.
pub fn spd_exp(a: &SpdAtom, y: &Matrix3<f64>) -> Result<SpdAtom, GeometryError> {
    if y.iter().all(|&x| x == 0.0) {
        return Ok(a.clone());
    }
    let s = a.sqrt();
    let is = a.inv_sqrt();
    let inner = symmetric_eigen(is * y * is)?;
    if inner.eigenvalues.min().exp() <= SPD_FLOOR {
        return Err(GeometryError::Domain(
            "exponential underflows the eigenvalue floor".into(),
        ));
    }
    let e = spectral_map(&inner, f64::exp);
    let r = s * e * s;
    SpdAtom::new(upper(&((r + r.transpose()) * 0.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpdRetraction {
    /// `A + Y + ½ Y A^{-1} Y`.
    #[default]
    SecondOrder,
    /// The Riemannian exponential.
    Exp,
}

impl std::str::FromStr for SpdRetraction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "second-order" => Ok(SpdRetraction::SecondOrder),
            "exp" => Ok(SpdRetraction::Exp),
            other => Err(format!("unknown retraction `{other}` (second-order|exp)")),
        }
    }
}

/// Sym⁺(3) backend.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Spd3 {
    pub mode: SpdRetraction,
}

impl Spd3 {
    pub fn new(mode: SpdRetraction) -> Self {
        Spd3 { mode }
    }

    /// Retraction applied to a symmetric tangent matrix.
    pub fn retract_matrix(&self, a: &SpdAtom, y: &Matrix3<f64>) -> Result<SpdAtom, GeometryError> {
        match self.mode {
            SpdRetraction::SecondOrder => Ok(spd_retract(a, y)),
            SpdRetraction::Exp => spd_exp(a, y),
        }
    }
}

impl Manifold for Spd3 {
    type Point = SpdAtom;

    fn dim(&self, _p: &SpdAtom) -> usize {
        6
    }

    fn retract(&self, p: &SpdAtom, v: &[f64]) -> Result<SpdAtom, GeometryError> {
        if v.len() != 6 {
            return Err(GeometryError::Dimension {
                expected: 6,
                got: v.len(),
            });
        }
        self.retract_matrix(p, &sym_from_coeffs(v))
    }

    fn inverse_retract(&self, c: &SpdAtom, q: &SpdAtom) -> Result<TangentCoords, GeometryError> {
        let s = c.sqrt();
        let is = c.inv_sqrt();
        let cm = is * q.matrix() * is;
        let cm = (cm + cm.transpose()) * 0.5;
        let z = match self.mode {
            // C = I + Z + Z²/2  ⇔  (I + Z)² = 2C − I, taking the root with I + Z > 0.
            SpdRetraction::SecondOrder => {
                let eig = symmetric_eigen(cm * 2.0 - Matrix3::identity())?;
                if eig.eigenvalues.min() <= 0.0 {
                    return Err(GeometryError::Domain("2C − I not positive definite".into()));
                }
                spectral_map(&eig, |x| x.sqrt() - 1.0)
            }
            SpdRetraction::Exp => spectral_map(&symmetric_eigen(cm)?, f64::ln),
        };
        Ok(coeffs_from_sym(&(s * z * s)).to_vec().into())
    }

    fn inner(&self, p: &SpdAtom, x: &[f64], y: &[f64]) -> f64 {
        spd_metric(p, &sym_from_coeffs(x), &sym_from_coeffs(y))
    }

    fn distance(&self, p: &SpdAtom, q: &SpdAtom) -> Result<f64, GeometryError> {
        spd_distance(p, q)
    }

    fn domain_radius(&self, _p: &SpdAtom) -> f64 {
        match self.mode {
            SpdRetraction::SecondOrder => 1.0,
            SpdRetraction::Exp => f64::INFINITY,
        }
    }

    fn embed(&self, p: &SpdAtom) -> Vec<f64> {
        p.components().to_vec()
    }

    fn embed_tangent(&self, _p: &SpdAtom, v: &[f64]) -> Vec<f64> {
        upper(&sym_from_coeffs(v)).to_vec()
    }

    /// `R diag(e^{g}) Rᵀ` with Haar `R` and `g ~ N(0, 0.5²)`.
    fn random_point(&self, rng: &mut dyn rand::RngCore) -> SpdAtom {
        random_spd(rng, 0.5)
    }
}

/// Random SPD matrix with log-eigenvalues `~ N(0, spread²)`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> SpdAtom {
    let r = random_rotation(3, rng);
    let r = Matrix3::from_iterator(r.iter().copied());
    let d = Vector3::from_fn(|_, _| {
        let g: f64 = rng.sample(StandardNormal);
        (spread * g).exp()
    });
    let m = r * Matrix3::from_diagonal(&d) * r.transpose();
    SpdAtom::new_unchecked(upper(&m))
}
