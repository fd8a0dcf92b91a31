use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use drg_core::imaging::{load_spd, save_spd, synth_spd, two_region_edge_means, NoiseSpec, SpdField, SpdPattern};
use drg_core::manifolds::Spd3;
use drg_core::problems::{TvConfig, TvProblem};
use drg_core::{EngineConfig, StopRule};

use crate::output::{
    create_dir, drive, parse_dims, parse_schedule, write_file, write_manifest, AuditSummary, EngineInfo, RunFlags,
};
use crate::CliError;

/// Step strategies compared by `--compare`.
pub const COMPARED_SCHEDULES: [&str; 3] = ["constant:0.05", "constant:0.01", "piecewise:0:0.05,12:0.01"];

/// Total-variation denoising of a diffusion tensor field.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DtiArgs {
    /// Tensor field (`.pspd3` text); default is synthetic.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic field size, ROWSxCOLS.
    #[arg(long, default_value = "16x16", conflicts_with = "input")]
    pub synthetic: String,
    /// Standard deviation of the tangent Gaussian noise.
    #[arg(long, default_value_t = 0.03)]
    pub sigma: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "two-region")]
    pub pattern: SpdPattern,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2)]
    pub beta: u8,
    #[arg(long, default_value_t = 1)]
    pub gamma: u8,
    #[arg(long, default_value = "piecewise:0:0.05,12:0.01")]
    pub schedule: String,
    /// Stop once (V(u^{k−1}) − V(u^k))/V(u^0) drops below this.
    #[arg(long, default_value_t = 1e-5)]
    pub stop_rel: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Also run τ=0.05, τ=0.01 and the mixed strategy and compare them.
    #[arg(long)]
    #[serde(default)]
    pub compare: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: RunFlags,
}

/// Iterations-to-stop of one schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleRun {
    pub schedule: String,
    pub stop_reason: String,
    pub iterations: usize,
    pub final_energy: f64,
    /// Smallest eigenvalue over all atoms of all iterates.
    pub min_eigenvalue: f64,
}

/// Mean inter-atom distances across and away from the two-region boundary.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeMeans {
    pub boundary: f64,
    pub interior: f64,
    pub ratio: f64,
}

impl EdgeMeans {
    fn of(field: &SpdField) -> Self {
        let (b, i) = two_region_edge_means(field);
        EdgeMeans {
            boundary: b,
            interior: i,
            ratio: b / i,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DtiReport {
    pub rows: usize,
    pub cols: usize,
    pub run: ScheduleRun,
    pub initial_energy: f64,
    /// All iterates had only positive eigenvalues.
    pub all_spd: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges_noisy: Option<EdgeMeans>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges_denoised: Option<EdgeMeans>,
    pub comparison: Vec<ScheduleRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_audit: Option<AuditSummary>,
}

impl DtiReport {
    /// The compared schedule with the fewest iterations (first on ties).
    pub fn fastest(&self) -> Option<&ScheduleRun> {
        self.comparison.iter().min_by_key(|r| r.iterations)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dti {}x{} schedule={}", self.rows, self.cols, self.run.schedule);
        let _ = writeln!(
            s,
            "stop: {} after {} iterations",
            self.run.stop_reason, self.run.iterations
        );
        let _ = writeln!(s, "V: {:.15e} -> {:.15e}", self.initial_energy, self.run.final_energy);
        let _ = writeln!(
            s,
            "all iterates SPD: {} (min eigenvalue {:.4e})",
            self.all_spd, self.run.min_eigenvalue
        );
        if let (Some(a), Some(b)) = (self.edges_noisy, self.edges_denoised) {
            let _ = writeln!(
                s,
                "edge means boundary/interior: noisy {:.4}/{:.4} ({:.2}x), denoised {:.4}/{:.4} ({:.2}x)",
                a.boundary, a.interior, a.ratio, b.boundary, b.interior, b.ratio
            );
        }
        if !self.comparison.is_empty() {
            let _ = writeln!(s, "schedule comparison (iterations to stop):");
            for r in &self.comparison {
                let _ = writeln!(
                    s,
                    "  {:<28} {:>6}  {}  V={:.12e}",
                    r.schedule, r.iterations, r.stop_reason, r.final_energy
                );
            }
            if let Some(f) = self.fastest() {
                let _ = writeln!(s, "fewest iterations: {}", f.schedule);
            }
        }
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

fn load_input(args: &DtiArgs) -> Result<(SpdField, bool), CliError> {
    match &args.input {
        Some(path) => Ok((load_spd(path)?, false)),
        None => {
            let (rows, cols) = parse_dims(&args.synthetic)?;
            if !(args.sigma >= 0.0) {
                return Err(CliError::Config(format!("sigma must be >= 0, got {}", args.sigma)));
            }
            let noisy = synth_spd(rows, cols, args.pattern, NoiseSpec::new(args.sigma, args.seed)).1;
            Ok((noisy, args.pattern == SpdPattern::TwoRegion))
        }
    }
}

fn min_eigenvalue(field: &SpdField) -> f64 {
    field
        .atoms
        .iter()
        .map(|a| a.min_eigenvalue())
        .fold(f64::INFINITY, f64::min)
}

#[allow(clippy::too_many_arguments)]
fn run_schedule(
    problem: &TvProblem<Spd3>,
    data: &SpdField,
    schedule: &str,
    stop: &StopRule,
    cfg: &EngineConfig,
    audit_stride: usize,
    dir: Option<&Path>,
) -> Result<(ScheduleRun, SpdField, Option<AuditSummary>), CliError> {
    let sched = parse_schedule(schedule)?;
    let mut lowest = min_eigenvalue(data);
    let (out, audit) = drive(problem, data, &sched, stop, cfg, audit_stride, dir, &mut |u, _, _| {
        lowest = lowest.min(min_eigenvalue(u));
    })?;
    let run = ScheduleRun {
        schedule: sched.to_string(),
        stop_reason: out.reason.to_string(),
        iterations: out.iterations(),
        final_energy: out.log.final_energy(),
        min_eigenvalue: lowest,
    };
    Ok((run, out.point, audit))
}

pub fn cmd_dti(args: &DtiArgs) -> Result<DtiReport, CliError> {
    let (data, two_region) = load_input(args)?;
    let config = TvConfig {
        lambda: args.lambda,
        beta: args.beta,
        gamma: args.gamma,
    };
    let problem = TvProblem::new(Spd3::default(), data.clone(), config)?;
    let stop = StopRule::relative(args.stop_rel, args.max_iters);
    let cfg = args.flags.engine(true);
    let dir = &args.flags.out;
    create_dir(dir)?;

    let (run, result, audit) = run_schedule(
        &problem,
        &data,
        &args.schedule,
        &stop,
        &cfg,
        args.flags.audit_stride,
        Some(dir),
    )?;
    save_spd(dir.join("result.pspd3"), &result)?;

    let mut comparison = Vec::new();
    if args.compare {
        for s in COMPARED_SCHEDULES {
            comparison.push(run_schedule(&problem, &data, s, &stop, &cfg, 0, None)?.0);
        }
        let mut csv = String::from("schedule,iterations,stop_reason,final_energy,min_eigenvalue\n");
        for r in &comparison {
            let _ = writeln!(
                csv,
                "{},{},{},{:?},{:?}",
                r.schedule, r.iterations, r.stop_reason, r.final_energy, r.min_eigenvalue
            );
        }
        write_file(dir, "compare.csv", csv)?;
    }
    let all_spd = run.min_eigenvalue > 0.0 && comparison.iter().all(|r| r.min_eigenvalue > 0.0);
    let report = DtiReport {
        rows: data.rows,
        cols: data.cols,
        initial_energy: problem_energy(&problem, &data)?,
        run,
        all_spd,
        edges_noisy: two_region.then(|| EdgeMeans::of(&data)),
        edges_denoised: two_region.then(|| EdgeMeans::of(&result)),
        comparison,
        delta_audit: audit,
    };
    write_file(dir, "report.txt", report.summary())?;
    write_manifest(dir, "dti", &EngineInfo::from(&cfg), args, &report)?;
    Ok(report)
}

fn problem_energy(problem: &TvProblem<Spd3>, u: &SpdField) -> Result<f64, CliError> {
    use drg_core::SweepObjective;
    Ok(problem.energy(u)?)
}
