//! Per-iteration convergence records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::EngineError;

pub const CSV_HEADER: [&str; 6] = ["k", "tau", "V", "dV", "dgnorm2", "wall_ms"];

/// One outer iteration `u^{k−1} → u^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub k: usize,
    pub tau: f64,
    /// `V(u^k)`.
    pub v: f64,
    /// `V(u^k) − V(u^{k−1})`.
    pub dv: f64,
    /// `Σ_j (α_j/τ)²`, the squared norm of the discrete gradient in the sweep basis.
    pub dgnorm2: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceLog {
    /// `V(u^0)`.
    pub initial_energy: f64,
    pub rows: Vec<LogRow>,
}

/// Result of [`dissipation_audit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit {
    pub passed: bool,
    /// Iteration index `k` of the first row with `ΔV_k` above the slack.
    pub first_violation: Option<usize>,
    /// Largest `ΔV_k / (1 + |V(u^{k−1})|)` seen.
    pub worst: f64,
}

/// Slack allowed on `V(u^k) − V(u^{k−1})`.
pub fn dissipation_slack(v_prev: f64) -> f64 {
    1e-10 * (1.0 + v_prev.abs())
}

/// Checks `ΔV_k ≤ 1e−10·(1 + |V(u^{k−1})|)` row by row.
pub fn dissipation_audit(log: &ConvergenceLog) -> Audit {
    let mut prev = log.initial_energy;
    let mut first = None;
    let mut worst = f64::NEG_INFINITY;
    for row in &log.rows {
        worst = worst.max(row.dv / (1.0 + prev.abs()));
        if !(row.dv <= dissipation_slack(prev)) && first.is_none() {
            first = Some(row.k);
        }
        prev = row.v;
    }
    Audit {
        passed: first.is_none(),
        first_violation: first,
        worst,
    }
}

impl ConvergenceLog {
    pub fn new(initial_energy: f64) -> Self {
        ConvergenceLog {
            initial_energy,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_energy(&self) -> f64 {
        self.rows.last().map_or(self.initial_energy, |r| r.v)
    }

    /// `V(u^0)` followed by every logged `V(u^k)`.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.rows.iter().map(|r| r.v))
            .collect()
    }

    /// `|Σ_k τ_k·dgnorm2_k − (V(u^0) − V(u^K))|`.
    pub fn telescoping_gap(&self) -> f64 {
        let lhs: f64 = self.rows.iter().map(|r| r.tau * r.dgnorm2).sum();
        (lhs - (self.initial_energy - self.final_energy())).abs()
    }

    /// CSV with header `k,tau,V,dV,dgnorm2,wall_ms`, floats in shortest
    /// round-trip form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), EngineError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| EngineError::Io(e.to_string());
        out.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            out.write_record([
                r.k.to_string(),
                format!("{:?}", r.tau),
                format!("{:?}", r.v),
                format!("{:?}", r.dv),
                format!("{:?}", r.dgnorm2),
                format!("{:?}", r.wall_ms),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| EngineError::Io(e.to_string()))
    }

    /// Inverse of [`write_csv`](Self::write_csv). `V(u^0)` is reconstructed from the first row.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, EngineError> {
        let mut rdr = csv::Reader::from_reader(r);
        let io = |e: csv::Error| EngineError::Io(e.to_string());
        let header = rdr.headers().map_err(io)?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(EngineError::Io(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<(usize, f64, f64, f64, f64, f64)>() {
            let (k, tau, v, dv, dgnorm2, wall_ms) = rec.map_err(io)?;
            rows.push(LogRow {
                k,
                tau,
                v,
                dv,
                dgnorm2,
                wall_ms,
            });
        }
        let initial_energy = rows.first().map_or(f64::NAN, |r| r.v - r.dv);
        Ok(ConvergenceLog { initial_energy, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(vs: &[f64]) -> ConvergenceLog {
        let mut log = ConvergenceLog::new(vs[0]);
        for (k, w) in vs.windows(2).enumerate() {
            log.rows.push(LogRow {
                k: k + 1,
                tau: 0.1,
                v: w[1],
                dv: w[1] - w[0],
                dgnorm2: (w[0] - w[1]) / 0.1,
                wall_ms: 0.0,
            });
        }
        log
    }

    #[test]
    fn audit_monotone_passes() {
        let log = synthetic(&[3.0, 2.0, 1.5, 1.4, 1.4]);
        assert!(dissipation_audit(&log).passed);
        assert!(log.telescoping_gap() < 1e-15);
    }

    #[test]
    fn audit_flags_jump() {
        let log = synthetic(&[3.0, 2.0, 2.001, 1.0]);
        let audit = dissipation_audit(&log);
        assert!(!audit.passed);
        assert_eq!(audit.first_violation, Some(2));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let log = synthetic(&[1.0 / 3.0, 0.1 + 0.2, 1e-300, -2.5e-17]);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,tau,V,dV,dgnorm2,wall_ms\n"));
        let back = ConvergenceLog::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows, log.rows);
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        ConvergenceLog::new(1.0).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,tau,V,dV,dgnorm2,wall_ms\n");
    }
}
