//! Step-size schedules `k ↦ τ_k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepSchedule {
    Constant {
        tau: f64,
    },
    /// `τ_k = max(τ₀ / 2^{⌊k/period⌋}, min_tau)`.
    Halving {
        tau0: f64,
        period: usize,
        min_tau: f64,
    },
    /// `τ_k` is the value of the last breakpoint with iteration `≤ k`.
    Piecewise {
        breakpoints: Vec<(usize, f64)>,
    },
}

/// Floor used when a halving schedule is given without one.
pub const DEFAULT_MIN_TAU: f64 = 1e-12;

impl StepSchedule {
    pub fn constant(tau: f64) -> Self {
        StepSchedule::Constant { tau }
    }

    pub fn halving(tau0: f64, period: usize) -> Self {
        StepSchedule::Halving {
            tau0,
            period,
            min_tau: DEFAULT_MIN_TAU,
        }
    }

    /// `τ₀` for the first `switch` iterations, then `τ₁`.
    pub fn two_phase(tau0: f64, switch: usize, tau1: f64) -> Self {
        StepSchedule::Piecewise {
            breakpoints: vec![(0, tau0), (switch, tau1)],
        }
    }

    /// Step for outer iteration `k` (0-based: `u^k → u^{k+1}`).
    pub fn tau(&self, k: usize) -> f64 {
        match self {
            StepSchedule::Constant { tau } => *tau,
            StepSchedule::Halving { tau0, period, min_tau } => {
                let halvings = (k / (*period).max(1)).min(1074) as i32;
                (tau0 * 0.5f64.powi(halvings)).max(*min_tau)
            }
            StepSchedule::Piecewise { breakpoints } => breakpoints
                .iter()
                .take_while(|(start, _)| *start <= k)
                .last()
                .map_or(breakpoints[0].1, |&(_, t)| t),
        }
    }

    /// Smallest step ever produced.
    pub fn tau_min(&self) -> f64 {
        match self {
            StepSchedule::Constant { tau } => *tau,
            StepSchedule::Halving { min_tau, tau0, .. } => min_tau.min(*tau0),
            StepSchedule::Piecewise { breakpoints } => breakpoints.iter().map(|b| b.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest step ever produced.
    pub fn tau_max(&self) -> f64 {
        match self {
            StepSchedule::Constant { tau } => *tau,
            StepSchedule::Halving { tau0, .. } => *tau0,
            StepSchedule::Piecewise { breakpoints } => breakpoints.iter().map(|b| b.1).fold(0.0, f64::max),
        }
    }

    /// Checks `0 < τ_min ≤ τ_max < ∞` and structural sanity.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            StepSchedule::Halving { period, .. } if *period == 0 => {
                return Err("halving period must be positive".into())
            }
            StepSchedule::Piecewise { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err("piecewise schedule needs at least one breakpoint".into());
                }
                if breakpoints[0].0 != 0 {
                    return Err("first breakpoint must start at iteration 0".into());
                }
                if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err("breakpoints must be strictly increasing".into());
                }
            }
            _ => {}
        }
        let (lo, hi) = (self.tau_min(), self.tau_max());
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(format!("step sizes must lie in (0, inf), got [{lo}, {hi}]"));
        }
        Ok(())
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Constant { tau } => write!(f, "constant:{tau}"),
            StepSchedule::Halving { tau0, period, min_tau } => {
                write!(f, "halving:{tau0}:{period}:{min_tau}")
            }
            StepSchedule::Piecewise { breakpoints } => {
                write!(f, "piecewise:")?;
                for (i, (k, t)) in breakpoints.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}:{t}")?;
                }
                Ok(())
            }
        }
    }
}

/// `constant:τ`, `halving:τ₀:period[:min]`, `piecewise:k₀:τ₀,k₁:τ₁,...`;
/// a bare number means a constant step.
impl FromStr for StepSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number `{x}`: {e}"));
        let int = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad integer `{x}`: {e}"));
        let (kind, rest) = s.split_once(':').unwrap_or(("constant", s));
        let sched = match kind.trim() {
            "constant" => StepSchedule::constant(num(rest)?),
            "halving" => {
                let parts: Vec<&str> = rest.split(':').collect();
                match parts.as_slice() {
                    [t, p] => StepSchedule::halving(num(t)?, int(p)?),
                    [t, p, m] => StepSchedule::Halving {
                        tau0: num(t)?,
                        period: int(p)?,
                        min_tau: num(m)?,
                    },
                    _ => return Err(format!("expected halving:tau0:period[:min], got `{s}`")),
                }
            }
            "piecewise" => {
                let breakpoints = rest
                    .split(',')
                    .map(|bp| {
                        let (k, t) = bp
                            .split_once(':')
                            .ok_or_else(|| format!("breakpoint `{bp}` is not k:tau"))?;
                        Ok((int(k)?, num(t)?))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                StepSchedule::Piecewise { breakpoints }
            }
            other => return Err(format!("unknown schedule kind `{other}`")),
        };
        sched.validate()?;
        Ok(sched)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_every_period() {
        let s = StepSchedule::halving(0.005, 200);
        assert_eq!(s.tau(0), 0.005);
        assert_eq!(s.tau(199), 0.005);
        assert_eq!(s.tau(200), 0.0025);
        assert_eq!(s.tau(401), 0.00125);
        assert_eq!(s.tau(1_000_000), DEFAULT_MIN_TAU);
    }

    #[test]
    fn two_phase_switches() {
        let s = StepSchedule::two_phase(0.05, 12, 0.01);
        assert_eq!(s.tau(11), 0.05);
        assert_eq!(s.tau(12), 0.01);
        assert_eq!((s.tau_min(), s.tau_max()), (0.01, 0.05));
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for text in [
            "constant:0.002",
            "halving:0.005:200:0.000001",
            "piecewise:0:0.05,12:0.01",
        ] {
            let s: StepSchedule = text.parse().unwrap();
            let again: StepSchedule = s.to_string().parse().unwrap();
            assert_eq!(s, again);
        }
        assert_eq!("0.1".parse::<StepSchedule>().unwrap(), StepSchedule::constant(0.1));
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            "constant:0",
            "constant:-1",
            "halving:0.1:0",
            "piecewise:3:0.1",
            "piecewise:0:0.1,0:0.2",
            "wobble:1",
        ] {
            assert!(bad.parse::<StepSchedule>().is_err(), "{bad}");
        }
    }
}
