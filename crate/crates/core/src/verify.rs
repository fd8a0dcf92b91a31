//! Randomised property suites over every backend and problem.
//!
//! Each property runs `trials` independent seeded trials (trial `t` uses
//! stream `t` of the suite seed), so results do not depend on the thread
//! count. `trials = 0` passes vacuously.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{
    dissipation_audit, fd_gradient, itoh_abe_drg, itoh_abe_sweep, mean_value_residual, run, EngineConfig, StepSchedule,
    StopRule, SweepObjective,
};
use crate::geometry::{
    radial_isometry_gap, random_tangent, retraction_tangency_order, verify_distance_axioms, verify_metric_bilinear,
    verify_metric_positive, verify_metric_symmetry, verify_retraction_axioms, Manifold,
};
use crate::linalg::{random_symmetric, seeded_rng};
use crate::manifolds::{
    Circle, Euclidean, Product, ProductPoint, SoRetraction, Spd3, SpdRetraction, SpecialOrthogonal, SphereChart,
};
use crate::par::{map_range, Parallelism};
use crate::problems::{AuditedObjective, BrockettProblem, RayleighProblem, TvConfig, TvProblem};

/// Step sizes every dissipation trial draws from.
pub const TAU_GRID: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark}  {:<36} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Drg,
    #[default]
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "drg" => Ok(Suite::Drg),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?} (geometry|drg|all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub parallelism: Parallelism,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            trials: 20,
            parallelism: Parallelism::Sequential,
        }
    }
}

impl VerifyConfig {
    fn rng(&self, salt: u64, trial: usize) -> ChaCha8Rng {
        let mut rng = seeded_rng(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.set_stream(trial as u64);
        rng
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Geometry | Suite::All) {
        out.extend(geometry_suite(cfg));
    }
    if matches!(suite, Suite::Drg | Suite::All) {
        out.extend(drg_suite(cfg));
    }
    out
}

/// Runs `check` on every trial and folds failures into one result.
fn property<F>(name: String, cfg: &VerifyConfig, check: F) -> PropertyResult
where
    F: Fn(usize) -> Result<(), String> + Sync + Send,
{
    let failures: Vec<(usize, String)> = map_range(cfg.trials, cfg.parallelism, |t| check(t).err().map(|e| (t, e)))
        .into_iter()
        .flatten()
        .collect();
    let detail = match failures.first() {
        None => format!("{} trials", cfg.trials),
        Some((t, e)) => format!("{}/{} trials failed; trial {t}: {e}", failures.len(), cfg.trials),
    };
    PropertyResult {
        name,
        passed: failures.is_empty(),
        detail,
    }
}

fn salt(label: &str, prop: &str) -> u64 {
    label.bytes().chain(prop.bytes()).fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

/// Tangent vector of norm `len` in a random direction.
fn tangent_of_norm<M: Manifold>(m: &M, p: &M::Point, len: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = random_tangent(m.dim(p), rng);
    let n = m.norm(p, &v);
    v.iter().map(|x| x * len / n).collect()
}

/// Step length comfortably inside the retraction's trust region.
fn safe_length<M: Manifold>(m: &M, p: &M::Point) -> f64 {
    0.5 * m.domain_radius(p).min(1.0)
}

fn geometry_backend<M: Manifold>(label: &str, m: &M, radial: bool, cfg: &VerifyConfig) -> Vec<PropertyResult> {
    let named = |p: &str| format!("{label}/{p}");
    let mut out = vec![
        property(named("retraction-axioms"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "axioms"), t);
            let p = m.random_point(&mut rng);
            let r = verify_retraction_axioms(m, &p, 1e-6, &mut rng);
            if r.all() {
                Ok(())
            } else {
                Err(format!("{r:?}"))
            }
        }),
        property(named("metric"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "metric"), t);
            let p = m.random_point(&mut rng);
            let sym = verify_metric_symmetry(m, &p, 10, &mut rng);
            let pos = verify_metric_positive(m, &p, 10, &mut rng);
            let bil = verify_metric_bilinear(m, &p, 10, &mut rng);
            if sym && pos && bil {
                Ok(())
            } else {
                Err(format!("symmetric {sym}, positive {pos}, bilinear {bil}"))
            }
        }),
        property(named("distance-axioms"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "distance"), t);
            let (p, q, r) = (
                m.random_point(&mut rng),
                m.random_point(&mut rng),
                m.random_point(&mut rng),
            );
            match verify_distance_axioms(m, &p, &q, &r) {
                Ok(true) => Ok(()),
                Ok(false) => Err("axiom violated".into()),
                Err(e) => Err(e.to_string()),
            }
        }),
        property(named("tangency-order"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "order"), t);
            let p = m.random_point(&mut rng);
            let v = tangent_of_norm(m, &p, safe_length(m, &p), &mut rng);
            match retraction_tangency_order(m, &p, &v, &[1e-2, 1e-3, 1e-4]) {
                Ok(order) if order >= 1.9 => Ok(()),
                Ok(order) => Err(format!("observed order {order:.3}")),
                Err(e) => Err(e.to_string()),
            }
        }),
    ];
    if radial {
        out.push(property(named("radial-isometry"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "radial"), t);
            let p = m.random_point(&mut rng);
            let len = rng.random_range(0.05..1.0);
            let v = tangent_of_norm(m, &p, len, &mut rng);
            match radial_isometry_gap(m, &p, &v) {
                Ok(gap) if gap <= 1e-9 => Ok(()),
                Ok(gap) => Err(format!("gap {gap:e}")),
                Err(e) => Err(e.to_string()),
            }
        }));
    }
    out
}

/// Retraction, metric and distance checks on every backend.
pub fn geometry_suite(cfg: &VerifyConfig) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    out.extend(geometry_backend("euclidean", &Euclidean::new(4), true, cfg));
    out.extend(geometry_backend("sphere", &SphereChart::new(5), false, cfg));
    out.extend(geometry_backend(
        "so4-cayley",
        &SpecialOrthogonal::new(4, SoRetraction::Cayley),
        false,
        cfg,
    ));
    out.extend(geometry_backend(
        "so4-exp",
        &SpecialOrthogonal::new(4, SoRetraction::Exp),
        true,
        cfg,
    ));
    out.extend(geometry_backend("circle", &Circle, true, cfg));
    out.extend(geometry_backend(
        "spd3",
        &Spd3::new(SpdRetraction::SecondOrder),
        false,
        cfg,
    ));
    out.extend(geometry_backend("spd3-exp", &Spd3::new(SpdRetraction::Exp), true, cfg));
    out.extend(geometry_backend("circle-2x3", &Product::new(Circle, 2, 3), false, cfg));
    out
}

fn drg_backend<M, F>(label: &str, m: &M, energy: F, cfg: &VerifyConfig) -> Vec<PropertyResult>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64 + Sync + Send,
{
    let named = |p: &str| format!("{label}/{p}");
    vec![
        property(named("mean-value-identity"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "mean-value"), t);
            let u = m.random_point(&mut rng);
            let len = safe_length(m, &u) * rng.random_range(0.01..1.0);
            let w = tangent_of_norm(m, &u, len, &mut rng);
            let v = m.retract(&u, &w).map_err(|e| e.to_string())?;
            let res = mean_value_residual(m, &energy, &u, &v).map_err(|e| e.to_string())?;
            let dv = energy(&v) - energy(&u);
            if res.abs() <= 1e-9 * (1.0 + dv.abs()) {
                Ok(())
            } else {
                Err(format!("residual {res:e} for ΔV = {dv:e}"))
            }
        }),
        property(named("gradient-consistency"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "gradient"), t);
            let u = m.random_point(&mut rng);
            let g = itoh_abe_drg(m, &energy, &u, &u).map_err(|e| e.to_string())?;
            let fd = fd_gradient(m, &energy, &u, 1e-5).map_err(|e| e.to_string())?;
            let diff = g
                .iter()
                .zip(fd.iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            if diff <= 1e-5 * (1.0 + scale) {
                Ok(())
            } else {
                Err(format!("|drg − fd| = {diff:e}, |fd| = {scale:e}"))
            }
        }),
        property(named("constant-energy"), cfg, |t| {
            let mut rng = cfg.rng(salt(label, "constant"), t);
            let u = m.random_point(&mut rng);
            let w = tangent_of_norm(m, &u, safe_length(m, &u), &mut rng);
            let v = m.retract(&u, &w).map_err(|e| e.to_string())?;
            let g = itoh_abe_drg(m, |_: &M::Point| 1.5, &u, &v).map_err(|e| e.to_string())?;
            if g.iter().all(|&x| x == 0.0) {
                Ok(())
            } else {
                Err(format!("nonzero gradient {:?}", &g[..]))
            }
        }),
    ]
}

/// Runs a few sweeps at a step size from [`TAU_GRID`] and audits the log.
fn dissipation_check<P: SweepObjective>(problem: &P, u0: &P::Point, tau: f64) -> Result<(), String> {
    let out = run(
        problem,
        u0,
        &StepSchedule::constant(tau),
        &StopRule::iterations(4),
        &EngineConfig::deterministic(),
    )
    .map_err(|f| f.error.to_string())?;
    let audit = dissipation_audit(&out.log);
    if !audit.passed {
        return Err(format!("τ = {tau}: energy rose at k = {:?}", audit.first_violation));
    }
    let gap = out.log.telescoping_gap();
    if gap > 1e-6 * (1.0 + out.log.initial_energy.abs()) {
        return Err(format!("τ = {tau}: telescoping gap {gap:e}"));
    }
    Ok(())
}

/// One audited sweep; every delta probe is recomputed from full energies.
fn delta_check<P: SweepObjective>(problem: &P, u0: &P::Point, tau: f64) -> Result<(), String> {
    let audited = AuditedObjective::new(problem, 1);
    itoh_abe_sweep(&audited, u0, tau, &Default::default(), None).map_err(|e| e.to_string())?;
    let a = audited.audit();
    if a.worst <= 1e-9 {
        Ok(())
    } else {
        Err(format!("worst relative error {:e} at {:?}", a.worst, a.worst_at))
    }
}

fn brockett_energy_fn(p: &BrockettProblem) -> impl Fn(&crate::manifolds::RotationPoint) -> f64 + Sync + Send + '_ {
    move |q| p.brockett_energy(q)
}

/// Discrete-gradient identities, dissipation and delta-evaluator fuzzing.
pub fn drg_suite(cfg: &VerifyConfig) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    let mut rng = seeded_rng(cfg.seed);

    let m = 5;
    let a = random_symmetric(m, &mut rng);
    let rayleigh = RayleighProblem::new(a.clone()).expect("symmetric");
    out.extend(drg_backend(
        "sphere",
        &SphereChart::new(m),
        |u: &crate::manifolds::SpherePoint| rayleigh.rayleigh_energy(&u.theta),
        cfg,
    ));
    for mode in [SoRetraction::Cayley, SoRetraction::Exp] {
        let b = BrockettProblem::new(random_symmetric(4, &mut rng), mode).expect("symmetric");
        let label = format!("so4-{}", if mode == SoRetraction::Cayley { "cayley" } else { "exp" });
        out.extend(drg_backend(
            &label,
            &SpecialOrthogonal::new(4, mode),
            brockett_energy_fn(&b),
            cfg,
        ));
    }
    let target = (0.7_f64, -1.2_f64);
    out.extend(drg_backend(
        "circle",
        &Circle,
        |p: &crate::manifolds::PhaseAtom| 1.0 - (p.0 - target.0).cos() + 0.3 * (2.0 * p.0 + target.1).sin(),
        cfg,
    ));
    let spd_ref = crate::manifolds::spd::random_spd(&mut rng, 0.4);
    out.extend(drg_backend(
        "spd3",
        &Spd3::default(),
        |x: &crate::manifolds::SpdAtom| {
            crate::manifolds::spd_distance(x, &spd_ref).map_or(f64::NAN, |d| d * d) + 0.2 * x.matrix().trace()
        },
        cfg,
    ));
    let data = ProductPoint::from_fn(2, 2, |_, _| Circle.random_point(&mut rng));
    let tv = TvProblem::new(
        Circle,
        data,
        TvConfig {
            lambda: 0.3,
            beta: 2,
            gamma: 2,
        },
    )
    .expect("valid config");
    out.extend(drg_backend(
        "tv-circle-2x2",
        &Product::new(Circle, 2, 2),
        |u: &ProductPoint<crate::manifolds::PhaseAtom>| tv.tv_energy(u).unwrap_or(f64::NAN),
        cfg,
    ));

    out.push(property("dissipation/rayleigh".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("dissipation", "rayleigh"), t);
        let p = RayleighProblem::new(random_symmetric(6, &mut rng)).expect("symmetric");
        let u0 = SphereChart::new(6).random_point(&mut rng);
        dissipation_check(&p, &u0, TAU_GRID[t % TAU_GRID.len()])
    }));
    out.push(property("dissipation/brockett".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("dissipation", "brockett"), t);
        let mode = if t % 2 == 0 {
            SoRetraction::Cayley
        } else {
            SoRetraction::Exp
        };
        let p = BrockettProblem::new(random_symmetric(5, &mut rng), mode).expect("symmetric");
        let q0 = SpecialOrthogonal::new(5, mode).random_point(&mut rng);
        dissipation_check(&p, &q0, TAU_GRID[t % TAU_GRID.len()])
    }));
    out.push(property("dissipation/tv-circle".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("dissipation", "tv-circle"), t);
        let s = ProductPoint::from_fn(4, 4, |_, _| Circle.random_point(&mut rng));
        let p = TvProblem::new(Circle, s.clone(), TvConfig::new(0.3)).expect("valid config");
        dissipation_check(&p, &s, TAU_GRID[t % TAU_GRID.len()])
    }));
    out.push(property("dissipation/tv-spd".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("dissipation", "tv-spd"), t);
        let spd = Spd3::default();
        let s = ProductPoint::from_fn(3, 3, |_, _| spd.random_point(&mut rng));
        let p = TvProblem::new(spd, s.clone(), TvConfig::new(0.05)).expect("valid config");
        dissipation_check(&p, &s, TAU_GRID[t % TAU_GRID.len()])
    }));

    out.push(property("delta-oracle/rayleigh".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("delta", "rayleigh"), t);
        let p = RayleighProblem::new(random_symmetric(8, &mut rng)).expect("symmetric");
        let u0 = SphereChart::new(8).random_point(&mut rng);
        delta_check(&p, &u0, TAU_GRID[t % TAU_GRID.len()])
    }));
    out.push(property("delta-oracle/brockett".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("delta", "brockett"), t);
        let mode = if t % 2 == 0 {
            SoRetraction::Cayley
        } else {
            SoRetraction::Exp
        };
        let p = BrockettProblem::new(random_symmetric(5, &mut rng), mode).expect("symmetric");
        let q0 = SpecialOrthogonal::new(5, mode).random_point(&mut rng);
        delta_check(&p, &q0, TAU_GRID[t % TAU_GRID.len()])
    }));
    out.push(property("delta-oracle/tv".into(), cfg, |t| {
        let mut rng = cfg.rng(salt("delta", "tv"), t);
        let s = ProductPoint::from_fn(3, 4, |_, _| Circle.random_point(&mut rng));
        let u0 = ProductPoint::from_fn(3, 4, |_, _| Circle.random_point(&mut rng));
        let p = TvProblem::new(Circle, s, TvConfig::new(0.3)).expect("valid config");
        delta_check(&p, &u0, TAU_GRID[t % TAU_GRID.len()])
    }));
    out
}
