use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use drg_core::imaging::{load_pgm_phase, load_phase, save_phase, synth_phase, NoiseSpec, PhaseImage, PhasePattern};
use drg_core::manifolds::Circle;
use drg_core::problems::{TvConfig, TvProblem};
use drg_core::StopRule;

use crate::analysis::{first_below, tail_slope, RateFit};
use crate::output::{
    create_dir, drive, optimality_errors, parse_dims, parse_schedule, write_file, write_manifest, AuditSummary,
    EngineInfo, RunFlags,
};
use crate::CliError;

/// Total-variation denoising of a wrapped phase image.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InsarArgs {
    /// Phase image (`.pphase` text or 8-bit `.pgm`); default is synthetic.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic image size, ROWSxCOLS.
    #[arg(long, default_value = "64x64", conflicts_with = "input")]
    pub synthetic: String,
    /// Standard deviation of the wrapped Gaussian noise.
    #[arg(long, default_value_t = 0.4)]
    pub sigma: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "ramp")]
    pub pattern: PhasePattern,
    #[arg(long, default_value_t = 0.3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2)]
    pub beta: u8,
    #[arg(long, default_value_t = 1)]
    pub gamma: u8,
    /// `constant:τ`, `halving:τ₀:period`, `piecewise:k:τ,...`.
    #[arg(long, default_value = "constant:0.002")]
    pub schedule: String,
    /// Iterations entering the tail-slope fit and the threshold report.
    #[arg(long, default_value_t = 6000)]
    pub horizon: usize,
    /// The reference minimum V* is the energy once ΔV ≤ this.
    #[arg(long, default_value_t = 1e-15)]
    pub ref_tol: f64,
    /// Iteration cap for the reference run.
    #[arg(long, default_value_t = 200_000)]
    pub max_iters: usize,
    /// Optimality-error level reported as "iterations to threshold".
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: RunFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct InsarReport {
    pub rows: usize,
    pub cols: usize,
    pub schedule: String,
    pub stop_reason: String,
    pub iterations: usize,
    pub initial_energy: f64,
    /// Energy at the end of the run, used as V*.
    pub reference_energy: f64,
    /// Rows with `ΔV ≥ 0` among the first `horizon` iterations.
    pub non_decreasing_steps: usize,
    /// Fit of log optimality error against log k.
    pub tail: Option<RateFit>,
    pub threshold: f64,
    pub iterations_to_threshold: Option<usize>,
    pub skipped: usize,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_audit: Option<AuditSummary>,
}

impl InsarReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "insar {}x{} schedule={}", self.rows, self.cols, self.schedule);
        let _ = writeln!(s, "stop: {} after {} iterations", self.stop_reason, self.iterations);
        let _ = writeln!(
            s,
            "V: {:.15e} -> V* = {:.15e}",
            self.initial_energy, self.reference_energy
        );
        let _ = writeln!(s, "non-decreasing steps in horizon: {}", self.non_decreasing_steps);
        match &self.tail {
            Some(t) => {
                let _ = writeln!(
                    s,
                    "tail slope over k in [{}, {}]: {:.4} (R^2 {:.4})",
                    t.first, t.last, t.slope, t.r_squared
                );
            }
            None => {
                let _ = writeln!(s, "tail slope: n/a");
            }
        }
        let _ = writeln!(
            s,
            "optimality error <= {:e} at k = {:?}",
            self.threshold, self.iterations_to_threshold
        );
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

fn load_input(args: &InsarArgs) -> Result<PhaseImage, CliError> {
    match &args.input {
        Some(path) => match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => Ok(load_pgm_phase(path)?),
            _ => Ok(load_phase(path)?),
        },
        None => {
            let (rows, cols) = parse_dims(&args.synthetic)?;
            if !(args.sigma >= 0.0) {
                return Err(CliError::Config(format!("sigma must be >= 0, got {}", args.sigma)));
            }
            Ok(synth_phase(rows, cols, args.pattern, NoiseSpec::new(args.sigma, args.seed)).1)
        }
    }
}

pub fn cmd_insar(args: &InsarArgs) -> Result<InsarReport, CliError> {
    let data = load_input(args)?;
    let config = TvConfig {
        lambda: args.lambda,
        beta: args.beta,
        gamma: args.gamma,
    };
    let problem = TvProblem::new(Circle, data.clone(), config)?;
    let schedule = parse_schedule(&args.schedule)?;
    let stop = StopRule {
        abs_tol: Some(args.ref_tol),
        max_iters: Some(args.max_iters),
        ..Default::default()
    };
    let cfg = args.flags.engine(true);
    let dir = &args.flags.out;
    create_dir(dir)?;

    let (out, audit) = drive(
        &problem,
        &data,
        &schedule,
        &stop,
        &cfg,
        args.flags.audit_stride,
        Some(dir),
        &mut |_, _, _| {},
    )?;
    save_phase(dir.join("result.pphase"), &out.point)?;

    let v_star = out.log.final_energy();
    let errors = optimality_errors(&out.log, v_star);
    let mut csv = String::from("k,opt_error\n");
    for (row, e) in out.log.rows.iter().zip(&errors) {
        let _ = writeln!(csv, "{},{e:?}", row.k);
    }
    write_file(dir, "optimality.csv", csv)?;

    let horizon = args.horizon.min(errors.len());
    let report = InsarReport {
        rows: data.rows,
        cols: data.cols,
        schedule: schedule.to_string(),
        stop_reason: out.reason.to_string(),
        iterations: out.iterations(),
        initial_energy: out.log.initial_energy,
        reference_energy: v_star,
        non_decreasing_steps: out.log.rows[..horizon].iter().filter(|r| !(r.dv < 0.0)).count(),
        tail: tail_slope(&errors, horizon),
        threshold: args.threshold,
        iterations_to_threshold: first_below(&errors, args.threshold),
        skipped: out.skipped,
        evaluations: out.evaluations,
        delta_audit: audit,
    };
    write_file(dir, "report.txt", report.summary())?;
    write_manifest(dir, "insar", &EngineInfo::from(&cfg), args, &report)?;
    Ok(report)
}
