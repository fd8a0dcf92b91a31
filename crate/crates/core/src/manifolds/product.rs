//! Fiberwise product of `rows × cols` copies of an atom manifold.
//!
//! Atoms are stored row-major; the tangent basis is the concatenation of the
//! atom bases in that order, so coordinate `k` belongs to atom `k / d` where
//! `d` is the atom dimension.

use crate::geometry::{GeometryError, Manifold, TangentCoords};

/// An image of manifold-valued atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint<A> {
    pub rows: usize,
    pub cols: usize,
    pub atoms: Vec<A>,
}

impl<A> ProductPoint<A> {
    pub fn new(rows: usize, cols: usize, atoms: Vec<A>) -> Result<Self, GeometryError> {
        if rows == 0 || cols == 0 {
            return Err(GeometryError::InvalidPoint("empty grid".into()));
        }
        if atoms.len() != rows * cols {
            return Err(GeometryError::Dimension {
                expected: rows * cols,
                got: atoms.len(),
            });
        }
        Ok(ProductPoint { rows, cols, atoms })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> A) -> Self {
        let mut atoms = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                atoms.push(f(i, j));
            }
        }
        ProductPoint { rows, cols, atoms }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    pub fn get(&self, i: usize, j: usize) -> &A {
        &self.atoms[i * self.cols + j]
    }

    pub fn same_shape<B>(&self, other: &ProductPoint<B>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Product manifold over a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Product<M> {
    pub atom: M,
    pub rows: usize,
    pub cols: usize,
}

impl<M: Manifold> Product<M> {
    pub fn new(atom: M, rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        Product { atom, rows, cols }
    }

    fn atom_dim(&self, p: &ProductPoint<M::Point>) -> usize {
        self.atom.dim(&p.atoms[0])
    }

    fn check(&self, p: &ProductPoint<M::Point>, v: &[f64]) -> Result<usize, GeometryError> {
        if p.rows != self.rows || p.cols != self.cols {
            return Err(GeometryError::InvalidPoint(format!(
                "grid {}x{} does not match {}x{}",
                p.rows, p.cols, self.rows, self.cols
            )));
        }
        let d = self.atom_dim(p);
        if v.len() != d * p.len() {
            return Err(GeometryError::Dimension {
                expected: d * p.len(),
                got: v.len(),
            });
        }
        Ok(d)
    }
}

impl<M: Manifold> Manifold for Product<M> {
    type Point = ProductPoint<M::Point>;

    fn dim(&self, p: &Self::Point) -> usize {
        p.len() * self.atom_dim(p)
    }

    fn retract(&self, p: &Self::Point, v: &[f64]) -> Result<Self::Point, GeometryError> {
        let d = self.check(p, v)?;
        let atoms = p
            .atoms
            .iter()
            .zip(v.chunks(d))
            .map(|(a, va)| self.atom.retract(a, va))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProductPoint {
            rows: p.rows,
            cols: p.cols,
            atoms,
        })
    }

    fn inverse_retract(&self, c: &Self::Point, q: &Self::Point) -> Result<TangentCoords, GeometryError> {
        if !c.same_shape(q) {
            return Err(GeometryError::InvalidPoint("grid shapes differ".into()));
        }
        let mut out = Vec::with_capacity(self.dim(c));
        for (a, b) in c.atoms.iter().zip(&q.atoms) {
            out.extend_from_slice(&self.atom.inverse_retract(a, b)?);
        }
        Ok(out.into())
    }

    fn inner(&self, p: &Self::Point, x: &[f64], y: &[f64]) -> f64 {
        let d = self.atom_dim(p);
        p.atoms
            .iter()
            .zip(x.chunks(d).zip(y.chunks(d)))
            .map(|(a, (xa, ya))| self.atom.inner(a, xa, ya))
            .sum()
    }

    /// Product distance `sqrt(Σ d(p_ij, q_ij)²)`.
    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64, GeometryError> {
        let mut sum = 0.0;
        for (a, b) in p.atoms.iter().zip(&q.atoms) {
            sum += self.atom.distance(a, b)?.powi(2);
        }
        Ok(sum.sqrt())
    }

    fn domain_radius(&self, p: &Self::Point) -> f64 {
        p.atoms
            .iter()
            .map(|a| self.atom.domain_radius(a))
            .fold(f64::INFINITY, f64::min)
    }

    fn embed(&self, p: &Self::Point) -> Vec<f64> {
        p.atoms.iter().flat_map(|a| self.atom.embed(a)).collect()
    }

    fn embed_tangent(&self, p: &Self::Point, v: &[f64]) -> Vec<f64> {
        let d = self.atom_dim(p);
        p.atoms
            .iter()
            .zip(v.chunks(d))
            .flat_map(|(a, va)| self.atom.embed_tangent(a, va))
            .collect()
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Self::Point {
        ProductPoint::from_fn(self.rows, self.cols, |_, _| self.atom.random_point(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_tangent;
    use crate::linalg::seeded_rng;
    use crate::manifolds::{Circle, Spd3};

    #[test]
    fn single_atom_grid_matches_atom() {
        let mut rng = seeded_rng(60);
        let spd = Spd3::default();
        let prod = Product::new(spd, 1, 1);
        let a = spd.random_point(&mut rng);
        let p = ProductPoint::new(1, 1, vec![a.clone()]).unwrap();
        let v = random_tangent(6, &mut rng).scaled(0.3);
        let w = random_tangent(6, &mut rng);
        assert_eq!(prod.retract(&p, &v).unwrap().atoms[0], spd.retract(&a, &v).unwrap());
        assert_eq!(prod.inner(&p, &v, &w), spd.inner(&a, &v, &w));
        let q = prod.random_point(&mut rng);
        assert_eq!(prod.distance(&p, &q).unwrap(), spd.distance(&a, &q.atoms[0]).unwrap());
    }

    #[test]
    fn disjoint_tangents_add() {
        let mut rng = seeded_rng(61);
        let prod = Product::new(Circle, 3, 4);
        let p = prod.random_point(&mut rng);
        let v = random_tangent(12, &mut rng);
        let mut x = v.clone();
        let mut y = v.clone();
        for k in 0..12 {
            if k < 6 {
                y[k] = 0.0;
            } else {
                x[k] = 0.0;
            }
        }
        let whole = prod.inner(&p, &v, &v);
        let parts = prod.inner(&p, &x, &x) + prod.inner(&p, &y, &y);
        assert!((whole - parts).abs() < 1e-12);
        assert_eq!(prod.inner(&p, &x, &y), 0.0);
    }

    #[test]
    fn fiberwise_retract() {
        let mut rng = seeded_rng(62);
        for _ in 0..10 {
            let prod = Product::new(Spd3::default(), 3, 2);
            let p = prod.random_point(&mut rng);
            let v = random_tangent(36, &mut rng).scaled(0.2);
            let q = prod.retract(&p, &v).unwrap();
            for (k, atom) in q.atoms.iter().enumerate() {
                let expect = prod.atom.retract(&p.atoms[k], &v[6 * k..6 * k + 6]).unwrap();
                assert_eq!(atom, &expect);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ProductPoint::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ProductPoint::<f64>::new(0, 2, vec![]).is_err());
    }
}
