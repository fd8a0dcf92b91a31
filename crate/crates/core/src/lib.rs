//! Derivative-free optimization on Riemannian manifolds with the Itoh–Abe
//! discrete Riemannian gradient.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] — the manifold contract (retraction, inverse retraction,
//!   metric, distance, tangent basis) and generic checks of its axioms.
//! * [`manifolds`] — concrete backends: the flat spherical-coordinate chart,
//!   SO(m) with Cayley and exponential retractions, the circle, Sym⁺(3) with
//!   the affine-invariant metric, and fiberwise product manifolds.
//! * [`engine`] — the coordinate sweep, scalar root solving, step schedules,
//!   stopping rules, convergence logs and the two-point discrete gradient.
//! * [`problems`] — energies with cheap single-coordinate deltas: Rayleigh
//!   quotient, Brockett trace energy, manifold total variation.
//! * [`imaging`] — phase and SPD field file formats and synthetic data.
//! * [`verify`] — property suites shared by the CLI and the test suites.

// `!(x <= t)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod geometry;
pub mod imaging;
pub mod linalg;
pub mod manifolds;
pub mod par;
pub mod problems;
pub mod verify;

pub use engine::{
    itoh_abe_drg, itoh_abe_sweep, run, ConvergenceLog, EngineConfig, EngineError, LogRow, RunOutcome, StepSchedule,
    StopReason, StopRule, SweepObjective, SweepOrder, SweepStats,
};
pub use geometry::{GeometryError, Manifold, TangentCoords};
