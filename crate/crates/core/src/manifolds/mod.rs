//! Concrete manifold backends.

pub mod circle;
pub mod euclidean;
pub mod product;
pub mod rotation;
pub mod spd;
pub mod sphere;

pub use circle::{angular_distance, circle_inverse, circle_retract, wrap_angle, Circle, PhaseAtom};
pub use euclidean::Euclidean;
pub use product::{Product, ProductPoint};
pub use rotation::{cayley, so_retract, RotationPoint, SkewBasis, SoRetraction, SpecialOrthogonal};
pub use spd::{spd_distance, spd_exp, spd_metric, spd_retract, Spd3, SpdAtom, SpdRetraction};
pub use sphere::{sphere_update_factors, spherical_embed, NearPole, SphereChart, SpherePoint};
