use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use drg_core::par::Parallelism;
use drg_core::verify::{run_suite, PropertyResult, Suite, VerifyConfig};

use crate::output::{create_dir, write_file};
use crate::CliError;

/// Run the geometry and discrete-gradient property suites.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// geometry | drg | all
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random cases per property.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Spread trials over the rayon pool.
    #[arg(long)]
    pub parallel: bool,
    /// Also write the table to DIR/report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            let _ = writeln!(s, "{r}");
        }
        let _ = writeln!(s, "{} properties, {} failed", self.results.len(), self.failures());
        s
    }
}

/// Runs the suites. Failures are part of the report; use
/// [`VerifyReport::failures`] or [`check`] to turn them into an error.
pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    let cfg = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        parallelism: if args.parallel {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        },
    };
    let report = VerifyReport {
        results: run_suite(args.suite, &cfg),
    };
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(dir, "report.txt", report.summary())?;
    }
    Ok(report)
}

pub fn check(report: &VerifyReport) -> Result<(), CliError> {
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Verify(n)),
    }
}
