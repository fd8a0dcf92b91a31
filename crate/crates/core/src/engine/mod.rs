//! The Itoh–Abe discrete-gradient optimizer.

pub mod brent;
pub mod coordinate;
pub mod drg;
pub mod log;
pub mod run;
pub mod schedule;
pub mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::par::Parallelism;

pub use brent::{brent_dekker, expand_bracket, Root, RootError};
pub use coordinate::{
    coordinate_residual, directional_estimate, solve_coordinate, CoordOutcome, CoordStatus, SolverConfig,
};
pub use drg::{fd_gradient, itoh_abe_drg, mean_value_residual};
pub use log::{dissipation_audit, Audit, ConvergenceLog, LogRow};
pub use run::{run, run_with, RunFailure, RunOutcome, StopReason, StopRule};
pub use schedule::StepSchedule;
pub use sweep::{itoh_abe_sweep, SweepObjective, SweepStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("non-finite energy difference {value} at step {alpha}")]
    Evaluation { alpha: f64, value: f64 },
    #[error("coordinate {coordinate}: {source}")]
    AtCoordinate {
        coordinate: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl EngineError {
    /// Attach the coordinate index to an evaluation failure.
    pub fn at_coordinate(self, coordinate: usize) -> Self {
        match self {
            e @ EngineError::Evaluation { .. } => EngineError::AtCoordinate {
                coordinate,
                source: Box::new(e),
            },
            other => other,
        }
    }
}

/// Coordinate visiting order for problems on image grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOrder {
    /// Atoms in row-major order.
    #[default]
    Raster,
    /// All atoms with `i + j` even, then all with `i + j` odd. Atoms of one
    /// colour only interact through the other colour, so each half can be
    /// processed in parallel.
    Checkerboard,
}

impl std::str::FromStr for SweepOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "raster" => Ok(SweepOrder::Raster),
            "checkerboard" => Ok(SweepOrder::Checkerboard),
            other => Err(format!("unknown sweep order `{other}` (raster|checkerboard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub solver: SolverConfig,
    pub order: SweepOrder,
    pub parallelism: Parallelism,
    /// Record wall time in the log; off gives byte-reproducible logs.
    pub timing: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            solver: SolverConfig::default(),
            order: SweepOrder::Raster,
            parallelism: Parallelism::Sequential,
            timing: true,
        }
    }
}

impl EngineConfig {
    /// Sequential, untimed: the reference configuration for reproducibility.
    pub fn deterministic() -> Self {
        EngineConfig {
            timing: false,
            ..Default::default()
        }
    }

    /// Checkerboard order on the rayon pool.
    pub fn parallel() -> Self {
        EngineConfig {
            order: SweepOrder::Checkerboard,
            parallelism: Parallelism::Rayon,
            ..Default::default()
        }
    }
}
