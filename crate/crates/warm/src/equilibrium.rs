//! Equilibria of the reinforcement dynamics, as fixed points on edge space.
//!
//! A positive edge vector `mu` is an equilibrium when for every edge
//! `mu(e) = sum over endpoints v of mu(e)^alpha / sum_{e' at v} mu(e')^alpha`.
//! The right-hand side defines a map on positive edge vectors; this module
//! evaluates it, verifies candidates, and solves for fixed points by damped
//! iteration started inside the invariant box
//! `[2 * Delta^(-1/(1-alpha)), 2]^E`, which the map provably preserves.
//!
//! On a regular graph of degree `Delta` the constant vector `2/Delta` is an
//! exact fixed point; non-regular graphs go through the solver.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};

pub const MU_CSV_HEADER: &str = "edge_id,mu";

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("entry {index} is not positive: {value}")]
    NonPositiveEntry { index: usize, value: f64 },
    #[error("vector covers {got} edges, graph has {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("max degree must be >= 1")]
    DegenerateDegree,
    #[error("mu csv, line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Last iterate, so callers can inspect or restart.
        last: Vec<f64>,
        /// Sup-norm change per iteration.
        residual_history: Vec<f64>,
    },
}

/// A candidate or solved equilibrium with its verification residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumVector {
    pub mu: Vec<f64>,
    /// Sup-norm of `mu - map(mu)`.
    pub residual: f64,
}

impl EquilibriumVector {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(MU_CSV_HEADER);
        out.push('\n');
        for (e, m) in self.mu.iter().enumerate() {
            out.push_str(&format!("{e},{m}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<f64>, EquilibriumError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == MU_CSV_HEADER => {}
            _ => {
                return Err(EquilibriumError::Csv {
                    line: 1,
                    message: format!("expected header {MU_CSV_HEADER:?}"),
                })
            }
        }
        let mut mu = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| EquilibriumError::Csv {
                line: idx + 1,
                message: message.into(),
            };
            let mut fields = line.split(',');
            let e: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("bad edge id"))?;
            let m: f64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("bad mu"))?;
            if e != mu.len() {
                return Err(bad("edge ids must run 0..edge_count"));
            }
            mu.push(m);
        }
        Ok(mu)
    }
}

/// Solver settings. Defaults: tol 1e-12, damping 0.5, max_iter 1e5.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            damping: 0.5,
            max_iter: 100_000,
        }
    }
}

/// Result of a converged solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equilibrium {
    pub mu: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub in_compact_set: bool,
}

impl Equilibrium {
    pub fn vector(&self) -> EquilibriumVector {
        EquilibriumVector {
            mu: self.mu.clone(),
            residual: self.residual,
        }
    }
}

/// Agreement report over solver restarts from random interior points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultistartReport {
    pub restarts: usize,
    /// Sup-distance between the farthest pair of fixed points found.
    pub max_pairwise_distance: f64,
    pub restarts_agree: bool,
}

fn check_alpha(alpha: f64) -> Result<(), EquilibriumError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(EquilibriumError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

fn check_vector(mu: &[f64], g: &Graph) -> Result<(), EquilibriumError> {
    if mu.len() != g.edge_count() {
        return Err(EquilibriumError::LengthMismatch {
            got: mu.len(),
            expected: g.edge_count(),
        });
    }
    for (index, &value) in mu.iter().enumerate() {
        if !(value > 0.0) {
            return Err(EquilibriumError::NonPositiveEntry { index, value });
        }
    }
    Ok(())
}

/// Applies the fixed-point map: each edge collects, from each endpoint, its
/// own weight power divided by the endpoint's total weight power.
pub fn fixed_point_map(mu: &[f64], g: &Graph, alpha: f64) -> Result<Vec<f64>, EquilibriumError> {
    check_alpha(alpha)?;
    check_vector(mu, g)?;
    let vertex_sums: Vec<f64> = (0..g.vertex_count())
        .map(|v| {
            g.incident_edges(v)
                .expect("in range")
                .iter()
                .map(|&e| mu[e].powf(alpha))
                .sum()
        })
        .collect();
    Ok(g.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let p = mu[e].powf(alpha);
            p / vertex_sums[u] + p / vertex_sums[v]
        })
        .collect())
}

/// The interval `[2 * delta^(-1/(1-alpha)), 2]` that the fixed-point map
/// preserves on graphs of max degree `delta`. Every solver iterate and every
/// solved equilibrium lies inside it.
pub fn equilibrium_bounds(delta: usize, alpha: f64) -> Result<(f64, f64), EquilibriumError> {
    check_alpha(alpha)?;
    if delta == 0 {
        return Err(EquilibriumError::DegenerateDegree);
    }
    Ok((2.0 * (delta as f64).powf(-1.0 / (1.0 - alpha)), 2.0))
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Checks whether `mu` satisfies the equilibrium equation within `tol`;
/// returns the verdict together with the sup residual.
pub fn verify_equilibrium(
    mu: &[f64],
    g: &Graph,
    alpha: f64,
    tol: f64,
) -> Result<(bool, f64), EquilibriumError> {
    let mapped = fixed_point_map(mu, g, alpha)?;
    let residual = sup_distance(mu, &mapped);
    Ok((residual <= tol, residual))
}

fn solve_from(
    start: Vec<f64>,
    g: &Graph,
    alpha: f64,
    opts: &SolveOptions,
) -> Result<Equilibrium, EquilibriumError> {
    let damping = opts.damping;
    assert!(
        damping > 0.0 && damping <= 1.0,
        "damping must lie in (0, 1]"
    );
    let (lo, hi) = equilibrium_bounds(g.max_degree(), alpha)?;
    let mut mu = start;
    let mut history = Vec::new();
    for iteration in 1..=opts.max_iter {
        let mapped = fixed_point_map(&mu, g, alpha)?;
        let mut change: f64 = 0.0;
        for (m, t) in mu.iter_mut().zip(&mapped) {
            let next = (1.0 - damping) * *m + damping * t;
            change = change.max((next - *m).abs());
            *m = next;
        }
        history.push(change);
        if change <= opts.tol {
            let mapped = fixed_point_map(&mu, g, alpha)?;
            let residual = sup_distance(&mu, &mapped);
            // guaranteed by the stopping rule
            debug_assert!(residual <= opts.tol * (1.0 + 1.0 / damping));
            let slack = 1e-12;
            let in_compact_set = mu.iter().all(|&m| m >= lo - slack && m <= hi + slack);
            return Ok(Equilibrium {
                mu,
                residual,
                iterations: iteration,
                in_compact_set,
            });
        }
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    Err(EquilibriumError::NonConvergence {
        iterations: opts.max_iter,
        residual,
        last: mu,
        residual_history: history,
    })
}

/// Damped fixed-point iteration `mu <- (1 - damping) mu + damping map(mu)`,
/// started at the midpoint of the invariant interval. Convexity keeps every
/// iterate inside it.
pub fn solve_fixed_point(
    g: &Graph,
    alpha: f64,
    opts: &SolveOptions,
) -> Result<Equilibrium, EquilibriumError> {
    let (lo, hi) = equilibrium_bounds(g.max_degree(), alpha)?;
    let start = vec![(lo + hi) / 2.0; g.edge_count()];
    solve_from(start, g, alpha, opts)
}

/// Re-solves from `restarts` random points inside the invariant box and
/// reports how far apart the found fixed points are. Uniqueness is never
/// assumed; disagreement shows up as a large pairwise distance.
pub fn solve_multistart(
    g: &Graph,
    alpha: f64,
    opts: &SolveOptions,
    restarts: usize,
    seed: u64,
) -> Result<(Equilibrium, MultistartReport), EquilibriumError> {
    let base = solve_fixed_point(g, alpha, opts)?;
    let (lo, hi) = equilibrium_bounds(g.max_degree(), alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = vec![base.mu.clone()];
    for _ in 0..restarts {
        let start: Vec<f64> = (0..g.edge_count())
            .map(|_| rng.gen_range(lo..=hi))
            .collect();
        let eq = solve_from(start, g, alpha, opts)?;
        found.push(eq.mu);
    }
    let mut max_pairwise_distance: f64 = 0.0;
    for i in 0..found.len() {
        for j in (i + 1)..found.len() {
            max_pairwise_distance = max_pairwise_distance.max(sup_distance(&found[i], &found[j]));
        }
    }
    // agreement within an order of magnitude of the solver tolerance
    let restarts_agree = max_pairwise_distance <= 100.0 * opts.tol;
    Ok((
        base,
        MultistartReport {
            restarts,
            max_pairwise_distance,
            restarts_agree,
        },
    ))
}
