use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use drg_core::linalg::{random_symmetric, seeded_rng};
use drg_core::manifolds::{SoRetraction, SpecialOrthogonal};
use drg_core::problems::{brockett_diag_error, BrockettProblem};
use drg_core::{Manifold, StepSchedule, StopRule};

use super::rayleigh::read_matrix;
use crate::analysis::{first_below, linear_rate, RateFit};
use crate::output::{create_dir, drive, write_file, write_manifest, AuditSummary, EngineInfo, RunFlags};
use crate::CliError;

/// Relative optimality errors below this are treated as roundoff when fitting
/// the linear rate.
pub const RATE_FLOOR: f64 = 1e-11;

/// Diagonalize a symmetric matrix by minimizing tr(D QᵀAQ) over SO(m).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BrockettArgs {
    /// Order of A (ignored with --matrix).
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    /// Symmetric matrix file (default: random from the seed).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value = "cayley")]
    pub retraction: SoRetraction,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Start from the identity instead of a random rotation.
    #[arg(long)]
    #[serde(default)]
    pub identity_start: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: RunFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrockettReport {
    pub m: usize,
    pub retraction: SoRetraction,
    pub stop_reason: String,
    pub iterations: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Minimum of the energy from the eigen-oracle.
    pub optimal_energy: f64,
    /// `‖diag(QᵀAQ) − λ‖₂` against the oracle spectrum.
    pub final_diag_error: f64,
    /// First iteration with diagonal error ≤ 1e−6.
    pub converged_at: Option<usize>,
    /// Fit of log optimality error against k.
    pub rate: Option<RateFit>,
    pub spectrum: Vec<f64>,
    pub final_diagonal: Vec<f64>,
    pub orthogonality_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_audit: Option<AuditSummary>,
}

impl BrockettReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "brockett m={} retraction={:?}", self.m, self.retraction);
        let _ = writeln!(s, "stop: {} after {} iterations", self.stop_reason, self.iterations);
        let _ = writeln!(
            s,
            "V: {:.15e} -> {:.15e} (V* = {:.15e})",
            self.initial_energy, self.final_energy, self.optimal_energy
        );
        let _ = writeln!(
            s,
            "diag error: {:.3e} (<= 1e-6 from k = {:?})",
            self.final_diag_error, self.converged_at
        );
        match &self.rate {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "linear rate over k in [{}, {}]: slope {:.6} (factor {:.6}/iter), R^2 {:.5}",
                    r.first,
                    r.last,
                    r.slope,
                    r.slope.exp(),
                    r.r_squared
                );
            }
            None => {
                let _ = writeln!(s, "linear rate: not enough iterations above the roundoff floor");
            }
        }
        let _ = writeln!(s, "orthogonality drift: {:.3e}", self.orthogonality_drift);
        if let Some(a) = self.delta_audit {
            let _ = writeln!(
                s,
                "delta audit: {} probes, worst relative {:.3e}, absolute {:.3e}",
                a.checked, a.worst_relative_error, a.worst_absolute_error
            );
        }
        s
    }
}

pub fn cmd_brockett(args: &BrockettArgs) -> Result<BrockettReport, CliError> {
    let mut rng = seeded_rng(args.seed);
    let a = match &args.matrix {
        Some(path) => read_matrix(path)?,
        None => random_symmetric(args.m, &mut rng),
    };
    let m = a.nrows();
    if m < 2 {
        return Err(CliError::Config(format!("need m >= 2, got {m}")));
    }
    let problem = BrockettProblem::new(a.clone(), args.retraction)?;
    let so = SpecialOrthogonal::new(m, args.retraction);
    let q0 = if args.identity_start {
        drg_core::manifolds::RotationPoint::identity(m)
    } else {
        so.random_point(&mut rng)
    };
    let schedule = StepSchedule::constant(args.tau);
    schedule.validate().map_err(CliError::Config)?;
    let stop = StopRule::iterations(args.iters);
    let cfg = args.flags.engine(false);
    let dir = &args.flags.out;
    create_dir(dir)?;

    let spectrum = problem.oracle_spectrum();
    let v_star = problem.optimal_energy();
    let diag_row = |k: usize, v: f64, q: &drg_core::manifolds::RotationPoint, v0: f64| {
        let n = problem.conjugated(q);
        let mut line = format!(
            "{k},{:?},{:?}",
            (v - v_star) / (v0 - v_star),
            brockett_diag_error(q, &a, &spectrum)
        );
        for i in 0..m {
            let _ = write!(line, ",{:?}", n[(i, i)]);
        }
        line.push('\n');
        line
    };
    let v0 = problem.brockett_energy(&q0);
    let mut csv = String::from("k,opt_error,diag_error");
    for i in 0..m {
        let _ = write!(csv, ",d{i}");
    }
    csv.push('\n');
    csv.push_str(&diag_row(0, v0, &q0, v0));
    let mut diag_errors = Vec::new();
    let (out, audit) = drive(
        &problem,
        &q0,
        &schedule,
        &stop,
        &cfg,
        args.flags.audit_stride,
        Some(dir),
        &mut |q, row, _| {
            csv.push_str(&diag_row(row.k, row.v, q, v0));
            diag_errors.push(brockett_diag_error(q, &a, &spectrum));
        },
    )?;
    write_file(dir, "diag.csv", &csv)?;

    let errors: Vec<f64> = out.log.rows.iter().map(|r| (r.v - v_star) / (v0 - v_star)).collect();
    let n = problem.conjugated(&out.point);
    let report = BrockettReport {
        m,
        retraction: args.retraction,
        stop_reason: out.reason.to_string(),
        iterations: out.iterations(),
        initial_energy: v0,
        final_energy: out.log.final_energy(),
        optimal_energy: v_star,
        final_diag_error: brockett_diag_error(&out.point, &a, &spectrum),
        converged_at: first_below(&diag_errors, 1e-6),
        rate: linear_rate(&errors, RATE_FLOOR),
        spectrum: spectrum.iter().copied().collect(),
        final_diagonal: (0..m).map(|i| n[(i, i)]).collect(),
        orthogonality_drift: out.point.orthogonality_drift(),
        delta_audit: audit,
    };
    write_file(dir, "report.txt", report.summary())?;
    write_manifest(dir, "brockett", &EngineInfo::from(&cfg), args, &report)?;
    Ok(report)
}
