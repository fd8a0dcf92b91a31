//! Flat `Rⁿ` with the identity retraction. Mostly useful as a reference case.

use rand::Rng;

use crate::geometry::{GeometryError, Manifold, TangentCoords};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    pub n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Euclidean { n }
    }
}

impl Manifold for Euclidean {
    type Point = Vec<f64>;

    fn dim(&self, _p: &Vec<f64>) -> usize {
        self.n
    }

    fn retract(&self, p: &Vec<f64>, v: &[f64]) -> Result<Vec<f64>, GeometryError> {
        Ok(p.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    fn inverse_retract(&self, c: &Vec<f64>, q: &Vec<f64>) -> Result<TangentCoords, GeometryError> {
        Ok(q.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>().into())
    }

    fn inner(&self, _p: &Vec<f64>, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn distance(&self, p: &Vec<f64>, q: &Vec<f64>) -> Result<f64, GeometryError> {
        Ok(p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }

    fn embed(&self, p: &Vec<f64>) -> Vec<f64> {
        p.clone()
    }

    fn embed_tangent(&self, _p: &Vec<f64>, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Vec<f64> {
        (0..self.n).map(|_| rng.random_range(-2.0..2.0)).collect()
    }
}
