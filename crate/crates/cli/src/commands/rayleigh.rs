use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use drg_core::linalg::{random_symmetric, seeded_rng, sorted_symmetric_eigen};
use drg_core::manifolds::{spherical_embed, SphereChart, SpherePoint};
use drg_core::problems::RayleighProblem;
use drg_core::{Manifold, StepSchedule, StopRule};

use crate::output::{create_dir, drive, write_file, write_manifest, AuditSummary, EngineInfo, RunFlags};
use crate::CliError;

/// Minimize the Rayleigh quotient xᵀAx over the unit sphere in spherical
/// coordinates.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RayleighArgs {
    /// Dimension of A (ignored with --matrix).
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Symmetric matrix file: one whitespace-separated row per line.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Seed for the random matrix and the random initial point.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Stop once the relative energy decrease falls below this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Initial angles θ₁,…,θ_{m−1} (default: random).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: RunFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayleighReport {
    pub m: usize,
    pub stop_reason: String,
    pub iterations: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Smallest and largest eigenvalue from the dense solver.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `V(u_final) − λ_min`.
    pub gap: f64,
    /// `|⟨x, v_min⟩|` for the final unit vector and the oracle eigenvector.
    pub alignment: f64,
    pub skipped: usize,
    pub evaluations: usize,
    pub theta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_audit: Option<AuditSummary>,
}

impl RayleighReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rayleigh m={}", self.m);
        let _ = writeln!(s, "stop: {} after {} iterations", self.stop_reason, self.iterations);
        let _ = writeln!(s, "V: {:.15e} -> {:.15e}", self.initial_energy, self.final_energy);
        let _ = writeln!(s, "lambda_min (dense): {:.15e}", self.lambda_min);
        let _ = writeln!(s, "gap: {:.3e}  alignment: {:.12}", self.gap, self.alignment);
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

pub fn read_matrix(path: &PathBuf) -> Result<DMatrix<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| match t.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(CliError::Config(format!(
                    "{}:{}: bad entry `{t}`",
                    path.display(),
                    n + 1
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let m = rows.len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Config(format!("{}: matrix is not square", path.display())));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

pub fn cmd_rayleigh(args: &RayleighArgs) -> Result<RayleighReport, CliError> {
    let mut rng = seeded_rng(args.seed);
    let a = match &args.matrix {
        Some(path) => read_matrix(path)?,
        None => random_symmetric(args.m, &mut rng),
    };
    let m = a.nrows();
    if m < 2 {
        return Err(CliError::Config(format!("need m >= 2, got {m}")));
    }
    let problem = RayleighProblem::new(a.clone())?;
    let u0 = match &args.theta0 {
        Some(theta) if theta.len() != m - 1 => {
            return Err(CliError::Config(format!(
                "--theta0 needs {} angles, got {}",
                m - 1,
                theta.len()
            )))
        }
        Some(theta) => SpherePoint::new(theta.clone()),
        None => SphereChart::new(m).random_point(&mut rng),
    };
    let stop = StopRule::relative(args.tol, args.max_iters);
    let schedule = StepSchedule::constant(args.tau);
    schedule.validate().map_err(CliError::Config)?;
    let cfg = args.flags.engine(false);
    let dir = &args.flags.out;
    create_dir(dir)?;

    let (out, audit) = drive(
        &problem,
        &u0,
        &schedule,
        &stop,
        &cfg,
        args.flags.audit_stride,
        Some(dir),
        &mut |_, _, _| {},
    )?;

    let (values, vectors) = sorted_symmetric_eigen(&a);
    let x = spherical_embed(&out.point.theta);
    let alignment = x
        .iter()
        .enumerate()
        .map(|(i, xi)| xi * vectors[(i, 0)])
        .sum::<f64>()
        .abs();
    let final_energy = out.log.final_energy();
    let report = RayleighReport {
        m,
        stop_reason: out.reason.to_string(),
        iterations: out.iterations(),
        initial_energy: out.log.initial_energy,
        final_energy,
        lambda_min: values[0],
        lambda_max: values[m - 1],
        gap: final_energy - values[0],
        alignment,
        skipped: out.skipped,
        evaluations: out.evaluations,
        theta: out.point.theta.clone(),
        delta_audit: audit,
    };
    write_file(dir, "report.txt", report.summary())?;
    write_manifest(dir, "rayleigh", &EngineInfo::from(&cfg), args, &report)?;
    Ok(report)
}
