//! The Itoh–Abe discrete Riemannian gradient as a two-point map.

use crate::geometry::{Manifold, TangentCoords};

use super::EngineError;

/// Step for the directional-derivative fallback and the reference gradient.
pub const DRG_FD_STEP: f64 = 1e-6;

/// Increments this small are roundoff from the inverse retraction (e.g.
/// `φ_u^{-1}(u)` computed as `~1e-17`); the difference quotient would only
/// amplify noise, so the directional derivative is used instead. The
/// mean-value identity then holds up to `O(η_j²)`.
pub const DRG_ZERO_STEP: f64 = 1e-10;

fn eval<M: Manifold, F: Fn(&M::Point) -> f64>(energy: &F, p: &M::Point) -> Result<f64, EngineError> {
    let v = energy(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EngineError::Evaluation {
            alpha: f64::NAN,
            value: v,
        })
    }
}

/// `d/dt V(φ_c(η + t E_j))` at `t = 0` by central differences.
fn directional<M: Manifold, F: Fn(&M::Point) -> f64>(
    m: &M,
    energy: &F,
    c: &M::Point,
    eta: &[f64],
    j: usize,
    h: f64,
) -> Result<f64, EngineError> {
    let mut plus = eta.to_vec();
    let mut minus = eta.to_vec();
    plus[j] += h;
    minus[j] -= h;
    let vp = eval::<M, F>(energy, &m.retract(c, &plus)?)?;
    let vm = eval::<M, F>(energy, &m.retract(c, &minus)?)?;
    Ok((vp - vm) / (2.0 * h))
}

/// Itoh–Abe DRG `ḡ(u, v)` with `c = u`.
///
/// With `η = φ_u^{-1}(v)` and `w_j = φ_u(η_1 E_1 + … + η_j E_j)` the
/// covector is `a_j = (V(w_j) − V(w_{j−1}))/η_j` (the directional derivative
/// at `w_{j−1}` when `η_j = 0`), and the returned vector is `G⁻¹a` with `G`
/// the Gram matrix of the basis at `u`. Hence
/// `g_u(ḡ, φ_u^{-1}(v)) = V(v) − V(u)` for any tangent basis.
pub fn itoh_abe_drg<M, F>(m: &M, energy: F, u: &M::Point, v: &M::Point) -> Result<TangentCoords, EngineError>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64,
{
    let eta = m.inverse_retract(u, v)?;
    let n = eta.len();
    let mut partial = vec![0.0; n];
    let mut a = vec![0.0; n];
    let mut v_prev = eval::<M, F>(&energy, u)?;
    for j in 0..n {
        if eta[j].abs() <= DRG_ZERO_STEP {
            a[j] = directional(m, &energy, u, &partial, j, DRG_FD_STEP)?;
            if eta[j] == 0.0 {
                continue;
            }
            partial[j] = eta[j];
            v_prev = eval::<M, F>(&energy, &m.retract(u, &partial)?)?;
            continue;
        }
        partial[j] = eta[j];
        let v_next = eval::<M, F>(&energy, &m.retract(u, &partial)?)?;
        a[j] = (v_next - v_prev) / eta[j];
        v_prev = v_next;
    }
    Ok(m.sharp(u, &a)?)
}

/// Riemannian gradient coefficients from central differences along each basis direction.
pub fn fd_gradient<M, F>(m: &M, energy: F, u: &M::Point, h: f64) -> Result<TangentCoords, EngineError>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64,
{
    let n = m.dim(u);
    let zero = vec![0.0; n];
    let a = (0..n)
        .map(|j| directional(m, &energy, u, &zero, j, h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(m.sharp(u, &a)?)
}

/// `g_u(ḡ, φ_u^{-1}(v)) − (V(v) − V(u))`.
pub fn mean_value_residual<M, F>(m: &M, energy: F, u: &M::Point, v: &M::Point) -> Result<f64, EngineError>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64,
{
    let g = itoh_abe_drg(m, &energy, u, v)?;
    let eta = m.inverse_retract(u, v)?;
    Ok(m.inner(u, &g, &eta) - (energy(v) - energy(u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_tangent;
    use crate::linalg::seeded_rng;
    use crate::manifolds::{Euclidean, Spd3};

    #[test]
    fn constant_energy_gives_zero() {
        let e = Euclidean::new(3);
        let g = itoh_abe_drg(&e, |_| 4.0, &vec![1.0, 2.0, 3.0], &vec![0.0, 1.0, -1.0]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn diagonal_is_gradient() {
        let e = Euclidean::new(2);
        let f = |p: &Vec<f64>| p[0] * p[0] + 3.0 * p[0] * p[1];
        let u = vec![0.5, -1.0];
        let g = itoh_abe_drg(&e, f, &u, &u).unwrap();
        assert!((g[0] - (2.0 * 0.5 - 3.0)).abs() < 1e-8);
        assert!((g[1] - 1.5).abs() < 1e-8);
    }

    #[test]
    fn mean_value_identity_with_nonorthonormal_basis() {
        let spd = Spd3::default();
        let mut rng = seeded_rng(80);
        let target = spd.random_point(&mut rng);
        let f = |p: &crate::manifolds::SpdAtom| crate::manifolds::spd_distance(p, &target).unwrap().powi(2);
        for _ in 0..20 {
            let u = spd.random_point(&mut rng);
            let dir = random_tangent(6, &mut rng);
            let v = spd.retract(&u, &dir.scaled(0.5 / spd.norm(&u, &dir))).unwrap();
            let res = mean_value_residual(&spd, f, &u, &v).unwrap();
            assert!(res.abs() < 1e-9 * (1.0 + (f(&v) - f(&u)).abs()), "{res}");
        }
    }
}
