//! Total-variation denoising of manifold-valued images.
//!
//! `V(u) = (1/β) Σ d(u_ij, s_ij)^β + λ (Σ d(u_ij, u_{i+1,j})^γ + Σ d(u_ij, u_{i,j+1})^γ)`
//! with Neumann boundaries (no wrap-around edges). A single-atom change only
//! touches its fidelity term and at most four edge terms, so every probe of
//! the sweep costs at most five distance evaluations.

use serde::{Deserialize, Serialize};

use crate::engine::{
    solve_coordinate, CoordOutcome, EngineConfig, EngineError, SolverConfig, SweepObjective, SweepOrder, SweepStats,
};
use crate::geometry::{GeometryError, Manifold};
use crate::manifolds::ProductPoint;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvConfig {
    pub lambda: f64,
    /// Fidelity exponent, 1 or 2.
    pub beta: u8,
    /// Edge exponent, 1 or 2.
    pub gamma: u8,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig {
            lambda: 0.3,
            beta: 2,
            gamma: 1,
        }
    }
}

impl TvConfig {
    pub fn new(lambda: f64) -> Self {
        TvConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !matches!(self.beta, 1 | 2) || !matches!(self.gamma, 1 | 2) {
            return Err(format!(
                "beta and gamma must be 1 or 2, got {} and {}",
                self.beta, self.gamma
            ));
        }
        Ok(())
    }
}

/// Grid neighbours of atom `idx` (up, down, left, right; Neumann boundary).
pub fn neighbors(rows: usize, cols: usize, idx: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (idx / cols, idx % cols);
    [
        (i > 0).then(|| idx - cols),
        (i + 1 < rows).then(|| idx + cols),
        (j > 0).then(|| idx - 1),
        (j + 1 < cols).then(|| idx + 1),
    ]
    .into_iter()
    .flatten()
}

/// Result of updating all coordinates of one atom.
#[derive(Debug, Clone)]
pub struct AtomUpdate<P> {
    pub atom: P,
    pub outcomes: Vec<CoordOutcome>,
}

#[derive(Debug, Clone)]
pub struct TvProblem<M: Manifold> {
    pub atom: M,
    data: ProductPoint<M::Point>,
    pub config: TvConfig,
}

impl<M: Manifold> TvProblem<M> {
    pub fn new(atom: M, data: ProductPoint<M::Point>, config: TvConfig) -> Result<Self, GeometryError> {
        config.validate().map_err(GeometryError::InvalidPoint)?;
        Ok(TvProblem { atom, data, config })
    }

    /// The noisy input `s`.
    pub fn data(&self) -> &ProductPoint<M::Point> {
        &self.data
    }

    fn dist(&self, a: &M::Point, b: &M::Point) -> Result<f64, EngineError> {
        Ok(self.atom.distance(a, b)?)
    }

    fn pow(d: f64, k: u8) -> f64 {
        if k == 1 {
            d
        } else {
            d * d
        }
    }

    /// `(1/β) d(x, s)^β`.
    pub fn fidelity(&self, x: &M::Point, s: &M::Point) -> Result<f64, EngineError> {
        let d = self.dist(x, s)?;
        Ok(Self::pow(d, self.config.beta) / self.config.beta as f64)
    }

    /// Every term of `V` that involves atom `idx`, with `x` in its place.
    pub fn local_energy(&self, img: &ProductPoint<M::Point>, idx: usize, x: &M::Point) -> Result<f64, EngineError> {
        let mut edges = 0.0;
        if self.config.lambda != 0.0 {
            for nb in neighbors(img.rows, img.cols, idx) {
                edges += Self::pow(self.dist(x, &img.atoms[nb])?, self.config.gamma);
            }
        }
        Ok(self.fidelity(x, &self.data.atoms[idx])? + self.config.lambda * edges)
    }

    /// Full `V(u)`.
    pub fn tv_energy(&self, u: &ProductPoint<M::Point>) -> Result<f64, EngineError> {
        if !u.same_shape(&self.data) {
            return Err(GeometryError::InvalidPoint("image and data shapes differ".into()).into());
        }
        let mut fid = 0.0;
        for (x, s) in u.atoms.iter().zip(&self.data.atoms) {
            fid += self.fidelity(x, s)?;
        }
        let mut edges = 0.0;
        if self.config.lambda != 0.0 {
            for i in 0..u.rows {
                for j in 0..u.cols {
                    let k = u.index(i, j);
                    if i + 1 < u.rows {
                        edges += Self::pow(self.dist(&u.atoms[k], &u.atoms[k + u.cols])?, self.config.gamma);
                    }
                    if j + 1 < u.cols {
                        edges += Self::pow(self.dist(&u.atoms[k], &u.atoms[k + 1])?, self.config.gamma);
                    }
                }
            }
        }
        Ok(fid + self.config.lambda * edges)
    }

    /// `V(u with atom (i, j) replaced) − V(u)` from the local terms only.
    pub fn tv_local_delta(
        &self,
        u: &ProductPoint<M::Point>,
        (i, j): (usize, usize),
        new_atom: &M::Point,
    ) -> Result<f64, EngineError> {
        let idx = u.index(i, j);
        Ok(self.local_energy(u, idx, new_atom)? - self.local_energy(u, idx, &u.atoms[idx])?)
    }

    /// Itoh–Abe steps along every basis direction of atom `idx`, centred at
    /// `center`, with the neighbours read from `img`.
    pub fn update_atom(
        &self,
        center: &M::Point,
        img: &ProductPoint<M::Point>,
        idx: usize,
        tau: f64,
        solver: &SolverConfig,
        warm: Option<&[f64]>,
    ) -> Result<AtomUpdate<M::Point>, EngineError> {
        let d = self.atom.dim(center);
        let mut eta = vec![0.0; d];
        let mut x = center.clone();
        let mut cur = self.local_energy(img, idx, &x)?;
        let mut outcomes = Vec::with_capacity(d);
        let mut probe = vec![0.0; d];
        for l in 0..d {
            let out = solve_coordinate(
                |a| {
                    probe.copy_from_slice(&eta);
                    probe[l] += a;
                    let y = self.atom.retract(center, &probe)?;
                    Ok(self.local_energy(img, idx, &y)? - cur)
                },
                tau,
                solver,
                warm.map(|w| w[l]),
            )
            .map_err(|e| e.at_coordinate(idx * d + l))?;
            if out.alpha != 0.0 {
                eta[l] += out.alpha;
                x = self.atom.retract(center, &eta)?;
                cur = self.local_energy(img, idx, &x)?;
            }
            outcomes.push(out);
        }
        Ok(AtomUpdate { atom: x, outcomes })
    }

    fn atom_dim(&self) -> usize {
        self.atom.dim(&self.data.atoms[0])
    }
}

/// Generic sweep state (used by the trait's per-coordinate interface).
#[derive(Debug, Clone)]
pub struct TvState<P> {
    center: ProductPoint<P>,
    current: ProductPoint<P>,
    eta: Vec<f64>,
    cached_atom: Option<usize>,
    local: f64,
}

impl<M: Manifold> SweepObjective for TvProblem<M> {
    type Point = ProductPoint<M::Point>;
    type State = TvState<M::Point>;

    fn dim(&self, u: &Self::Point) -> usize {
        u.len() * self.atom_dim()
    }

    fn energy(&self, u: &Self::Point) -> Result<f64, EngineError> {
        self.tv_energy(u)
    }

    fn begin(&self, center: &Self::Point) -> Result<Self::State, EngineError> {
        if !center.same_shape(&self.data) {
            return Err(GeometryError::InvalidPoint("image and data shapes differ".into()).into());
        }
        Ok(TvState {
            center: center.clone(),
            current: center.clone(),
            eta: vec![0.0; self.dim(center)],
            cached_atom: None,
            local: 0.0,
        })
    }

    fn prepare(&self, state: &mut Self::State, j: usize) -> Result<(), EngineError> {
        let idx = j / self.atom_dim();
        if state.cached_atom != Some(idx) {
            state.local = self.local_energy(&state.current, idx, &state.current.atoms[idx])?;
            state.cached_atom = Some(idx);
        }
        Ok(())
    }

    fn delta(&self, state: &Self::State, j: usize, alpha: f64) -> Result<f64, EngineError> {
        let idx = j / self.atom_dim();
        let trial = self.trial_atom(state, j, alpha)?;
        Ok(self.local_energy(&state.current, idx, &trial)? - state.local)
    }

    fn commit(&self, state: &mut Self::State, j: usize, alpha: f64) -> Result<(), EngineError> {
        let idx = j / self.atom_dim();
        let atom = self.trial_atom(state, j, alpha)?;
        state.eta[j] += alpha;
        state.local = self.local_energy(&state.current, idx, &atom)?;
        state.current.atoms[idx] = atom;
        Ok(())
    }

    fn finish(&self, state: Self::State) -> Self::Point {
        state.current
    }

    fn current(&self, state: &Self::State) -> Self::Point {
        state.current.clone()
    }

    fn trial(&self, state: &Self::State, j: usize, alpha: f64) -> Result<Self::Point, EngineError> {
        let mut img = state.current.clone();
        img.atoms[j / self.atom_dim()] = self.trial_atom(state, j, alpha)?;
        Ok(img)
    }

    /// Atom-by-atom sweep in raster or checkerboard order.
    fn sweep(
        &self,
        u: &Self::Point,
        tau: f64,
        cfg: &EngineConfig,
        warm: Option<&[f64]>,
    ) -> Result<(Self::Point, SweepStats), EngineError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(EngineError::InvalidConfig(format!("step size {tau} must be positive")));
        }
        if !u.same_shape(&self.data) {
            return Err(GeometryError::InvalidPoint("image and data shapes differ".into()).into());
        }
        let d = self.atom_dim();
        let mut stats = SweepStats::new(u.len() * d, tau);
        let mut img = u.clone();
        let warm_for = |idx: usize| warm.map(|w| &w[idx * d..idx * d + d]);
        let record = |idx: usize, up: &AtomUpdate<M::Point>, stats: &mut SweepStats| {
            for (l, out) in up.outcomes.iter().enumerate() {
                stats.record(idx * d + l, out);
            }
        };
        match cfg.order {
            SweepOrder::Raster => {
                for idx in 0..u.len() {
                    let up = self.update_atom(&u.atoms[idx], &img, idx, tau, &cfg.solver, warm_for(idx))?;
                    record(idx, &up, &mut stats);
                    img.atoms[idx] = up.atom;
                }
            }
            SweepOrder::Checkerboard => {
                for color in 0..2 {
                    let idxs: Vec<usize> = (0..u.len())
                        .filter(|&k| (k / u.cols + k % u.cols) % 2 == color)
                        .collect();
                    let snapshot = &img;
                    let results = par::map_slice(&idxs, cfg.parallelism, |&idx| {
                        self.update_atom(&u.atoms[idx], snapshot, idx, tau, &cfg.solver, warm_for(idx))
                    });
                    for (&idx, up) in idxs.iter().zip(results) {
                        let up = up?;
                        record(idx, &up, &mut stats);
                        img.atoms[idx] = up.atom;
                    }
                }
            }
        }
        Ok((img, stats))
    }
}

impl<M: Manifold> TvProblem<M> {
    fn trial_atom(&self, state: &TvState<M::Point>, j: usize, alpha: f64) -> Result<M::Point, EngineError> {
        let d = self.atom_dim();
        let idx = j / d;
        let mut eta = state.eta[idx * d..idx * d + d].to_vec();
        eta[j % d] += alpha;
        Ok(self.atom.retract(&state.center.atoms[idx], &eta)?)
    }
}
