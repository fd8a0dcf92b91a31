use proptest::prelude::*;
use rand::Rng;

use drg_core::geometry::{radial_isometry_gap, verify_distance_axioms, verify_retraction_axioms};
use drg_core::linalg::seeded_rng;
use drg_core::manifolds::{
    spd_distance, spherical_embed, Circle, Product, SoRetraction, Spd3, SpdAtom, SpdRetraction, SpecialOrthogonal,
    SphereChart,
};
use drg_core::Manifold;

fn tangent(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

/// `φ⁻¹_p(φ_p(v)) = v` for tangents inside the injectivity domain.
fn roundtrip<M: Manifold>(m: &M, seed: u64, scale: f64) -> f64 {
    let mut rng = seeded_rng(seed);
    let p = m.random_point(&mut rng);
    let r = m.domain_radius(&p).min(1.0);
    let v = tangent(m.dim(&p), 1.0, seed ^ 0x5eed);
    let len = m.norm(&p, &v);
    let v: Vec<f64> = v.iter().map(|x| x * scale * r / len).collect();
    let q = m.retract(&p, &v).unwrap();
    let w = m.inverse_retract(&p, &q).unwrap();
    v.iter().zip(w.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_roundtrip(seed in any::<u64>(), m in 2usize..8, scale in 0.01f64..0.9) {
        prop_assert!(roundtrip(&SphereChart::new(m), seed, scale) < 1e-9);
    }

    #[test]
    fn rotation_roundtrip(seed in any::<u64>(), m in 2usize..6, scale in 0.01f64..0.9, cayley in any::<bool>()) {
        let mode = if cayley { SoRetraction::Cayley } else { SoRetraction::Exp };
        prop_assert!(roundtrip(&SpecialOrthogonal::new(m, mode), seed, scale) < 1e-9);
    }

    #[test]
    fn spd_roundtrip(seed in any::<u64>(), scale in 0.01f64..0.9, exp in any::<bool>()) {
        let mode = if exp { SpdRetraction::Exp } else { SpdRetraction::SecondOrder };
        let e = roundtrip(&Spd3::new(mode), seed, scale);
        prop_assert!(e < 1e-9, "{}", e);
    }

    #[test]
    fn circle_product_roundtrip(seed in any::<u64>(), scale in 0.01f64..0.9) {
        prop_assert!(roundtrip(&Product::new(Circle, 3, 4), seed, scale) < 1e-12);
    }

    #[test]
    fn rotations_stay_orthogonal(seed in any::<u64>(), m in 2usize..7, step in 0.0f64..20.0) {
        for mode in [SoRetraction::Cayley, SoRetraction::Exp] {
            let so = SpecialOrthogonal::new(m, mode);
            let mut rng = seeded_rng(seed);
            let p = so.random_point(&mut rng);
            let v = tangent(so.dim(&p), step, seed);
            let q = so.retract(&p, &v).unwrap();
            prop_assert!(q.orthogonality_drift() < 1e-12);
            prop_assert!(q.matrix().determinant() > 0.0);
        }
    }

    #[test]
    fn spd_retractions_stay_positive(seed in any::<u64>(), step in 0.0f64..10.0) {
        for mode in [SpdRetraction::SecondOrder, SpdRetraction::Exp] {
            let spd = Spd3::new(mode);
            let mut rng = seeded_rng(seed);
            let p = spd.random_point(&mut rng);
            match spd.retract(&p, &tangent(6, step, seed)) {
                Ok(q) => prop_assert!(q.min_eigenvalue() > 0.0, "{:?}", mode),
                Err(e) => prop_assert!(mode == SpdRetraction::Exp, "{}", e),
            }
        }
    }

    #[test]
    fn sphere_points_embed_to_unit_vectors(seed in any::<u64>(), m in 2usize..10) {
        let s = SphereChart::new(m);
        let p = s.random_point(&mut seeded_rng(seed));
        let norm: f64 = spherical_embed(&p.theta).iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spd_distance_is_affine_invariant(seed in any::<u64>()) {
        let spd = Spd3::default();
        let mut rng = seeded_rng(seed);
        let (p, q) = (spd.random_point(&mut rng), spd.random_point(&mut rng));
        let g = nalgebra::Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0)) + nalgebra::Matrix3::identity() * 2.0;
        let move_ = |x: &SpdAtom| SpdAtom::from_matrix(&(g * x.matrix() * g.transpose())).unwrap();
        let d0 = spd_distance(&p, &q).unwrap();
        let d1 = spd_distance(&move_(&p), &move_(&q)).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-8 * (1.0 + d0), "{} vs {}", d0, d1);
    }
}

#[test]
fn retraction_axioms_hold_on_every_backend() {
    let mut rng = seeded_rng(11);
    for _ in 0..5 {
        let s = SphereChart::new(4);
        let p = s.random_point(&mut rng);
        assert!(verify_retraction_axioms(&s, &p, 1e-6, &mut rng).all());
        for mode in [SoRetraction::Cayley, SoRetraction::Exp] {
            let so = SpecialOrthogonal::new(4, mode);
            let p = so.random_point(&mut rng);
            assert!(verify_retraction_axioms(&so, &p, 1e-6, &mut rng).all(), "{mode:?}");
        }
        for mode in [SpdRetraction::SecondOrder, SpdRetraction::Exp] {
            let spd = Spd3::new(mode);
            let p = spd.random_point(&mut rng);
            assert!(verify_retraction_axioms(&spd, &p, 1e-6, &mut rng).all(), "{mode:?}");
        }
        let c = Product::new(Circle, 2, 2);
        let p = c.random_point(&mut rng);
        assert!(verify_retraction_axioms(&c, &p, 1e-6, &mut rng).all());
    }
}

#[test]
fn distances_are_metrics() {
    let mut rng = seeded_rng(12);
    for _ in 0..20 {
        let so = SpecialOrthogonal::new(3, SoRetraction::Exp);
        let (p, q, r) = (
            so.random_point(&mut rng),
            so.random_point(&mut rng),
            so.random_point(&mut rng),
        );
        assert!(verify_distance_axioms(&so, &p, &q, &r).unwrap());
        let spd = Spd3::default();
        let (p, q, r) = (
            spd.random_point(&mut rng),
            spd.random_point(&mut rng),
            spd.random_point(&mut rng),
        );
        assert!(verify_distance_axioms(&spd, &p, &q, &r).unwrap());
        let s = SphereChart::new(5);
        let (p, q, r) = (
            s.random_point(&mut rng),
            s.random_point(&mut rng),
            s.random_point(&mut rng),
        );
        assert!(verify_distance_axioms(&s, &p, &q, &r).unwrap());
    }
}

#[test]
fn exponential_retractions_are_radial_isometries() {
    let mut rng = seeded_rng(13);
    for _ in 0..20 {
        let so = SpecialOrthogonal::new(4, SoRetraction::Exp);
        let p = so.random_point(&mut rng);
        let v = tangent(so.dim(&p), 0.4, rng.random());
        assert!(radial_isometry_gap(&so, &p, &v).unwrap() < 1e-10);
        let spd = Spd3::new(SpdRetraction::Exp);
        let p = spd.random_point(&mut rng);
        let v = tangent(6, 0.8, rng.random());
        assert!(radial_isometry_gap(&spd, &p, &v).unwrap() < 1e-10);
        let c = Circle;
        let p = c.random_point(&mut rng);
        assert!(radial_isometry_gap(&c, &p, &[1.3]).unwrap() < 1e-14);
    }
}
