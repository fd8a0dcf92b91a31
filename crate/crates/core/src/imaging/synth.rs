//! Seeded synthetic phase images and SPD fields.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{NoiseSpec, PhaseImage, SpdField};
use crate::linalg::seeded_rng;
use crate::manifolds::spd::{spd_retract, sym_from_coeffs};
use crate::manifolds::{circle_retract, wrap_angle, PhaseAtom, ProductPoint, SpdAtom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhasePattern {
    /// Linear ramp, about three fringes across the diagonal.
    #[default]
    Ramp,
    /// Four vertical plateaus.
    Steps,
    /// Zone plate: phase quadratic in the distance from the centre.
    Zones,
}

impl FromStr for PhasePattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ramp" => Ok(PhasePattern::Ramp),
            "steps" => Ok(PhasePattern::Steps),
            "zones" => Ok(PhasePattern::Zones),
            _ => Err(format!("unknown phase pattern {s:?} (ramp|steps|zones)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpdPattern {
    /// Left half elongated along x, right half along y. Eigenvalues
    /// `(1.7, 0.3, 0.3)`, typical white-matter diffusivities in units of
    /// `10⁻³ mm²/s`.
    #[default]
    TwoRegion,
    /// Principal axis rotating smoothly across the columns.
    Smooth,
}

impl FromStr for SpdPattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two-region" => Ok(SpdPattern::TwoRegion),
            "smooth" => Ok(SpdPattern::Smooth),
            _ => Err(format!("unknown SPD pattern {s:?} (two-region|smooth)")),
        }
    }
}

fn clean_phase(rows: usize, cols: usize, pattern: PhasePattern) -> PhaseImage {
    ProductPoint::from_fn(rows, cols, |i, j| {
        let (y, x) = (i as f64 / rows as f64, j as f64 / cols as f64);
        let phi = match pattern {
            PhasePattern::Ramp => 2.0 * PI * (1.75 * x + 1.25 * y),
            PhasePattern::Steps => -2.4 + 1.6 * ((4 * j / cols) as f64),
            PhasePattern::Zones => {
                let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
                8.0 * PI * r2
            }
        };
        PhaseAtom(wrap_angle(phi))
    })
}

/// `(clean, noisy)`, noisy atoms are `circle_retract(clean, g)`, `g ~ N(0, σ²)`.
pub fn synth_phase(rows: usize, cols: usize, pattern: PhasePattern, noise: NoiseSpec) -> (PhaseImage, PhaseImage) {
    assert!(rows > 0 && cols > 0, "image dimensions must be positive");
    let clean = clean_phase(rows, cols, pattern);
    let mut rng = seeded_rng(noise.seed);
    let mut noisy = clean.clone();
    for a in &mut noisy.atoms {
        let g: f64 = rng.sample(StandardNormal);
        a.0 = circle_retract(a.0, noise.sigma * g);
    }
    (clean, noisy)
}

fn tensor(axis_angle: f64, evals: [f64; 3]) -> SpdAtom {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), axis_angle);
    let m = r.matrix() * Matrix3::from_diagonal(&Vector3::from(evals)) * r.matrix().transpose();
    SpdAtom::from_matrix(&((m + m.transpose()) * 0.5)).expect("positive eigenvalues")
}

fn clean_spd(rows: usize, cols: usize, pattern: SpdPattern) -> SpdField {
    ProductPoint::from_fn(rows, cols, |i, j| match pattern {
        SpdPattern::TwoRegion => {
            let angle = if 2 * j < cols { 0.0 } else { PI / 2.0 };
            tensor(angle, [1.7, 0.3, 0.3])
        }
        SpdPattern::Smooth => {
            let angle = PI * j as f64 / cols as f64;
            let major = 1.4 + 0.6 * i as f64 / rows as f64;
            tensor(angle, [major, 0.4, 0.3])
        }
    })
}

/// `(clean, noisy)`, noisy atoms are `spd_retract(clean, Z)` with `Z` having
/// i.i.d. `N(0, σ²)` coefficients in the sparse symmetric basis.
pub fn synth_spd(rows: usize, cols: usize, pattern: SpdPattern, noise: NoiseSpec) -> (SpdField, SpdField) {
    assert!(rows > 0 && cols > 0, "field dimensions must be positive");
    let clean = clean_spd(rows, cols, pattern);
    let mut rng = seeded_rng(noise.seed);
    let mut noisy = clean.clone();
    for a in &mut noisy.atoms {
        let g: [f64; 6] = std::array::from_fn(|_| noise.sigma * rng.sample::<f64, _>(StandardNormal));
        let next = spd_retract(a, &sym_from_coeffs(&g));
        debug_assert!(next.min_eigenvalue() > 0.0);
        *a = next;
    }
    (clean, noisy)
}

/// Mean distance over edges crossing the two-region boundary and over all
/// other edges.
pub fn two_region_edge_means(field: &SpdField) -> (f64, f64) {
    use crate::manifolds::spd_distance;
    let half = field.cols / 2;
    let (mut bs, mut bn, mut is, mut inn) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..field.rows {
        for j in 0..field.cols {
            let a = field.get(i, j);
            let mut edge = |b: &SpdAtom, boundary: bool| {
                let d = spd_distance(a, b).unwrap_or(f64::NAN);
                if boundary {
                    bs += d;
                    bn += 1;
                } else {
                    is += d;
                    inn += 1;
                }
            };
            if j + 1 < field.cols {
                edge(field.get(i, j + 1), j + 1 == half);
            }
            if i + 1 < field.rows {
                edge(field.get(i + 1, j), false);
            }
        }
    }
    (bs / bn.max(1) as f64, is / inn.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Circle;
    use crate::problems::{TvConfig, TvProblem};

    #[test]
    fn zero_noise_is_clean() {
        for p in [PhasePattern::Ramp, PhasePattern::Steps, PhasePattern::Zones] {
            let (c, n) = synth_phase(5, 7, p, NoiseSpec::new(0.0, 3));
            assert_eq!(c, n);
        }
        let (c, n) = synth_spd(4, 4, SpdPattern::Smooth, NoiseSpec::new(0.0, 3));
        assert_eq!(c, n);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = synth_phase(6, 6, PhasePattern::Ramp, NoiseSpec::new(0.3, 9));
        let b = synth_phase(6, 6, PhasePattern::Ramp, NoiseSpec::new(0.3, 9));
        assert_eq!(a, b);
        let c = synth_phase(6, 6, PhasePattern::Ramp, NoiseSpec::new(0.3, 10));
        assert_ne!(a.1, c.1);
        assert_eq!(
            synth_spd(3, 3, SpdPattern::TwoRegion, NoiseSpec::new(0.2, 1)),
            synth_spd(3, 3, SpdPattern::TwoRegion, NoiseSpec::new(0.2, 1))
        );
    }

    #[test]
    fn noise_raises_tv_energy() {
        let (clean, noisy) = synth_phase(32, 32, PhasePattern::Ramp, NoiseSpec::new(0.4, 1));
        let p = TvProblem::new(Circle, clean.clone(), TvConfig::new(0.3)).unwrap();
        assert!(p.tv_energy(&noisy).unwrap() > p.tv_energy(&clean).unwrap());
    }

    #[test]
    fn noisy_spd_atoms_stay_spd() {
        let (_, noisy) = synth_spd(25, 40, SpdPattern::Smooth, NoiseSpec::new(0.5, 2));
        assert!(noisy.atoms.iter().all(|a| a.min_eigenvalue() > 0.0));
    }

    #[test]
    fn two_region_boundary_is_visible() {
        let (clean, noisy) = synth_spd(16, 16, SpdPattern::TwoRegion, NoiseSpec::new(0.03, 4));
        let (b, i) = two_region_edge_means(&clean);
        assert!(b > 2.0 && i < 1e-12, "{b} {i}");
        let (b, i) = two_region_edge_means(&noisy);
        assert!(b > 3.0 * i, "{b} {i}");
    }
}
