//! Output directory handling, the shared run driver and manifests.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use drg_core::engine::{dissipation_audit, run_with};
use drg_core::par::Parallelism;
use drg_core::problems::{AuditedObjective, DeltaAudit};
use drg_core::{
    ConvergenceLog, EngineConfig, LogRow, RunOutcome, StepSchedule, StopRule, SweepObjective, SweepOrder, SweepStats,
};

use crate::CliError;

/// Flags shared by every optimization command.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RunFlags {
    /// Output directory.
    #[arg(long, default_value = "drg-out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Write 0 in the wall_ms column so logs are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    /// Checkerboard sweeps on the rayon pool (image problems only).
    #[arg(long)]
    pub parallel: bool,
    /// Re-check every n-th energy delta against full recomputation (0 = off).
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub audit_stride: usize,
}

impl RunFlags {
    pub fn engine(&self, image_problem: bool) -> EngineConfig {
        let mut cfg = if self.parallel && image_problem {
            EngineConfig::parallel()
        } else {
            EngineConfig::default()
        };
        cfg.timing = !self.no_timing;
        cfg
    }
}

/// Engine settings as recorded in a manifest.
#[derive(Debug, Clone, Serialize)]
pub struct EngineInfo {
    pub order: SweepOrder,
    pub parallelism: Parallelism,
    pub timing: bool,
    pub threads: usize,
}

impl From<&EngineConfig> for EngineInfo {
    fn from(cfg: &EngineConfig) -> Self {
        EngineInfo {
            order: cfg.order,
            parallelism: cfg.parallelism,
            timing: cfg.timing,
            threads: if cfg.parallelism.is_parallel() {
                thread_count()
            } else {
                1
            },
        }
    }
}

fn thread_count() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Delta audit summary for reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditSummary {
    pub checked: usize,
    pub worst_relative_error: f64,
    pub worst_absolute_error: f64,
}

impl From<DeltaAudit> for AuditSummary {
    fn from(a: DeltaAudit) -> Self {
        AuditSummary {
            checked: a.checked,
            worst_relative_error: a.worst,
            worst_absolute_error: a.worst_absolute,
        }
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn write_log(dir: &Path, log: &ConvergenceLog) -> Result<(), CliError> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    write_file(dir, "log.csv", buf)?;
    Ok(())
}

pub fn parse_schedule(s: &str) -> Result<StepSchedule, CliError> {
    let sched: StepSchedule = s.parse().map_err(CliError::Config)?;
    sched.validate().map_err(CliError::Config)?;
    Ok(sched)
}

/// `ROWSxCOLS`.
pub fn parse_dims(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("dimensions `{s}` are not ROWSxCOLS"));
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let rows: usize = r.trim().parse().map_err(|_| bad())?;
    let cols: usize = c.trim().parse().map_err(|_| bad())?;
    if rows == 0 || cols == 0 {
        return Err(bad());
    }
    Ok((rows, cols))
}

/// Runs the engine, optionally behind a delta audit, and writes `log.csv`
/// into `dir` when given (also on failure, with the partial log).
///
/// Fails if the log violates the dissipation invariant.
#[allow(clippy::too_many_arguments)]
pub fn drive<P: SweepObjective>(
    problem: &P,
    u0: &P::Point,
    schedule: &StepSchedule,
    stop: &StopRule,
    cfg: &EngineConfig,
    audit_stride: usize,
    dir: Option<&Path>,
    observer: &mut dyn FnMut(&P::Point, &LogRow, &SweepStats),
) -> Result<(RunOutcome<P::Point>, Option<AuditSummary>), CliError> {
    let (result, audit) = if audit_stride > 0 {
        let audited = AuditedObjective::new(problem, audit_stride);
        let r = run_with(&audited, u0, schedule, stop, cfg, observer);
        (r, Some(audited.audit().into()))
    } else {
        (run_with(problem, u0, schedule, stop, cfg, observer), None)
    };
    let out = match result {
        Ok(out) => out,
        Err(fail) => {
            if let Some(dir) = dir {
                write_log(dir, &fail.log)?;
            }
            return Err(CliError::Runtime(format!(
                "run failed after {} iterations: {}",
                fail.log.len(),
                fail.error
            )));
        }
    };
    if let Some(dir) = dir {
        write_log(dir, &out.log)?;
    }
    let dissipation = dissipation_audit(&out.log);
    if !dissipation.passed {
        return Err(CliError::Runtime(format!(
            "energy increased at iteration {:?} (worst relative rise {:e})",
            dissipation.first_violation, dissipation.worst
        )));
    }
    Ok((out, audit))
}

#[derive(Serialize)]
struct ManifestOut<'a, C, R> {
    command: &'a str,
    version: &'a str,
    engine: &'a EngineInfo,
    config: &'a C,
    result: &'a R,
}

/// Writes `manifest.txt`: the command, engine settings, the full
/// configuration (enough to replay the run) and the result summary.
pub fn write_manifest<C: Serialize, R: Serialize>(
    dir: &Path,
    command: &str,
    engine: &EngineInfo,
    config: &C,
    result: &R,
) -> Result<(), CliError> {
    let m = ManifestOut {
        command,
        version: env!("CARGO_PKG_VERSION"),
        engine,
        config,
        result,
    };
    let text = toml::to_string(&m).map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
    write_file(dir, "manifest.txt", text)?;
    Ok(())
}

/// Reads back `command` and `config` from a manifest.
pub fn read_manifest(path: &Path) -> Result<(String, toml::Table), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let command = match table.remove("command") {
        Some(toml::Value::String(s)) => s,
        _ => return Err(CliError::Config("manifest has no `command`".into())),
    };
    let config = match table.remove("config") {
        Some(toml::Value::Table(t)) => t,
        _ => return Err(CliError::Config("manifest has no [config] table".into())),
    };
    Ok((command, config))
}

pub fn config_from<C: for<'de> Deserialize<'de>>(table: toml::Table) -> Result<C, CliError> {
    table
        .try_into()
        .map_err(|e| CliError::Config(format!("manifest config: {e}")))
}

/// Relative optimality errors `(V_k − V*)/(V_0 − V*)` for the logged rows.
pub fn optimality_errors(log: &ConvergenceLog, v_star: f64) -> Vec<f64> {
    let denom = log.initial_energy - v_star;
    log.rows.iter().map(|r| (r.v - v_star) / denom).collect()
}
