//! Trajectory diagnostics and bracket arithmetic for the homogenization
//! claims: finite-window limit estimation, stability percolation, and the
//! bootstrap function that tightens bracketing intervals around the
//! equilibrium on regular graphs.
//!
//! Liminf and limsup of a trajectory are not observable; the estimators here
//! take min and max over the trailing window of a snapshot series and are
//! named estimates throughout. Grid verifiers use strict inequalities with a
//! small guard band so roundoff cannot manufacture a pass.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SnapshotSeries;
use crate::graph::{EdgeId, Graph, GraphError};

/// Guard band for strict-inequality grid checks.
pub const GRID_GUARD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("bootstrap function needs delta >= 2, got {0} (delta = 1 makes it constant)")]
    DegreeTooSmall(usize),
    #[error("arguments must be positive, got ({0}, {1})")]
    NonPositiveArgs(f64, f64),
    #[error("invalid bracket: need 0 < a <= 2/delta <= b, got a={a}, b={b}, delta={delta}")]
    InvalidBracket { a: f64, b: f64, delta: usize },
    #[error("bracket violation: need 0 < a < 2/delta < b < 2, got a={a}, b={b}, delta={delta}")]
    BracketViolation { a: f64, b: f64, delta: usize },
    #[error("window fraction must lie in (0, 1), got {0}")]
    BadWindowFraction(f64),
    #[error("estimation window holds {0} snapshots, need at least 2")]
    WindowTooSmall(usize),
    #[error("inputs cover {got} edges, graph has {expected}")]
    Coverage { got: usize, expected: usize },
    #[error("equilibrium entry {0} is not positive")]
    NonPositiveMu(usize),
    #[error("threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("auto bracket needs alpha in [0, 1), got {0}")]
    AutoBracketAlpha(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The bracket-update function `f(r, s) = 2 r^alpha / (r^alpha + (delta - 1) s^alpha)`.
///
/// Increasing in `r`, decreasing in `s`, with fixed point `f(c, c) = 2/delta`.
pub fn bootstrap_f(r: f64, s: f64, alpha: f64, delta: usize) -> Result<f64, AnalysisError> {
    if delta < 2 {
        return Err(AnalysisError::DegreeTooSmall(delta));
    }
    if !(r > 0.0 && s > 0.0) {
        return Err(AnalysisError::NonPositiveArgs(r, s));
    }
    let rp = r.powf(alpha);
    let sp = s.powf(alpha);
    Ok(2.0 * rp / (rp + (delta - 1) as f64 * sp))
}

/// Starting bracket `(2^(-alpha/(1-alpha)), 2)` for the degree-2 case: the
/// lower end is where one bootstrap application of the trivial bounds lands.
pub fn auto_bracket(alpha: f64) -> Result<(f64, f64), AnalysisError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(AnalysisError::AutoBracketAlpha(alpha));
    }
    Ok((2f64.powf(-alpha / (1.0 - alpha)), 2.0))
}

/// Iterated bracketing intervals produced by the bootstrap function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSequence {
    pub alpha: f64,
    pub delta: usize,
    /// `(a_i, b_i)` pairs, starting from the initial bracket.
    pub brackets: Vec<(f64, f64)>,
    /// Whether `b - a <= tol` was reached within the iteration budget.
    pub converged: bool,
}

impl BoundSequence {
    pub fn iterations(&self) -> usize {
        self.brackets.len().saturating_sub(1)
    }

    pub fn final_gap(&self) -> f64 {
        let &(a, b) = self.brackets.last().expect("nonempty");
        b - a
    }
}

/// Iterates `a <- max(a, f(a, b))`, `b <- min(b, f(b, a))` until the gap
/// closes to `tol` or the budget runs out. The lower end never decreases and
/// the upper end never increases.
pub fn bootstrap_sequence(
    alpha: f64,
    delta: usize,
    a1: f64,
    b1: f64,
    max_iter: usize,
    tol: f64,
) -> Result<BoundSequence, AnalysisError> {
    if delta < 2 {
        return Err(AnalysisError::DegreeTooSmall(delta));
    }
    let center = 2.0 / delta as f64;
    if !(a1 > 0.0 && a1 <= center && center <= b1) {
        return Err(AnalysisError::InvalidBracket {
            a: a1,
            b: b1,
            delta,
        });
    }
    let (mut a, mut b) = (a1, b1);
    let mut brackets = vec![(a, b)];
    for _ in 0..max_iter {
        if b - a <= tol {
            break;
        }
        let a_next = a.max(bootstrap_f(a, b, alpha, delta)?);
        let b_next = b.min(bootstrap_f(b, a, alpha, delta)?);
        a = a_next;
        b = b_next;
        brackets.push((a, b));
    }
    Ok(BoundSequence {
        alpha,
        delta,
        converged: b - a <= tol,
        brackets,
    })
}

/// True when the bootstrap strictly improves at least one side of the
/// bracket. Requires `0 < a < 2/delta < b < 2`.
pub fn improvement_check(
    a: f64,
    b: f64,
    alpha: f64,
    delta: usize,
) -> Result<bool, AnalysisError> {
    if delta < 2 {
        return Err(AnalysisError::DegreeTooSmall(delta));
    }
    let center = 2.0 / delta as f64;
    if !(a > 0.0 && a < center && center < b && b < 2.0) {
        return Err(AnalysisError::BracketViolation { a, b, delta });
    }
    Ok(bootstrap_f(a, b, alpha, delta)? > a || bootstrap_f(b, a, alpha, delta)? < b)
}

/// True when `f(a, 2) > a`; holds for every `a` below `2 delta^(-1/(1-alpha))`.
pub fn lower_threshold_check(a: f64, alpha: f64, delta: usize) -> Result<bool, AnalysisError> {
    Ok(bootstrap_f(a, 2.0, alpha, delta)? > a)
}

/// Lower-bound sequence for weights observed at dyadic times `2^(k*l)`:
/// `delta^(-1/(1-alpha)) * 2^(k(l-1) - k * sum_{i=2..l} alpha^i)`.
///
/// Normalized by `2^(-k*l)` it decreases to a positive limit, which is what
/// rules out vanishing edge weights.
pub fn dyadic_lower_bound(k: u32, l: u32, alpha: f64, delta: usize) -> f64 {
    assert!(k >= 1 && l >= 1, "k and l start at 1");
    assert!(alpha < 1.0, "exponent defined for alpha < 1");
    let kf = k as f64;
    let tail: f64 = (2..=l).map(|i| alpha.powi(i as i32)).sum();
    (delta as f64).powf(-1.0 / (1.0 - alpha)) * 2f64.powf(kf * (l as f64 - 1.0) - kf * tail)
}

/// Outcome of a grid sweep: how many points passed and which failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCheck {
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<(f64, f64)>,
}

impl GridCheck {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total && self.total > 0
    }
}

/// Sweeps the improvement check over `a in (0, 2/delta)`, `b in (2/delta, 2)`
/// on a lattice with the given step, using the guard band on both strict
/// inequalities.
pub fn improvement_grid(alpha: f64, delta: usize, step: f64) -> Result<GridCheck, AnalysisError> {
    if delta < 2 {
        return Err(AnalysisError::DegreeTooSmall(delta));
    }
    let center = 2.0 / delta as f64;
    let mut check = GridCheck {
        total: 0,
        passed: 0,
        failures: Vec::new(),
    };
    let mut i = 1;
    loop {
        let a = i as f64 * step;
        if a >= center - GRID_GUARD {
            break;
        }
        let mut j = (center / step) as usize;
        while (j as f64) * step <= center + GRID_GUARD {
            j += 1;
        }
        loop {
            let b = j as f64 * step;
            if b >= 2.0 - GRID_GUARD {
                break;
            }
            check.total += 1;
            let improves = bootstrap_f(a, b, alpha, delta)? > a + GRID_GUARD
                || bootstrap_f(b, a, alpha, delta)? < b - GRID_GUARD;
            if improves {
                check.passed += 1;
            } else {
                check.failures.push((a, b));
            }
            j += 1;
        }
        i += 1;
    }
    Ok(check)
}

/// Sweeps the lower-threshold check over `points` values of `a` strictly
/// inside `(0, 2 delta^(-1/(1-alpha)))`.
pub fn lower_threshold_grid(
    alpha: f64,
    delta: usize,
    points: usize,
) -> Result<GridCheck, AnalysisError> {
    if delta < 2 {
        return Err(AnalysisError::DegreeTooSmall(delta));
    }
    let threshold = 2.0 * (delta as f64).powf(-1.0 / (1.0 - alpha));
    let mut check = GridCheck {
        total: 0,
        passed: 0,
        failures: Vec::new(),
    };
    for i in 1..=points {
        let a = threshold * i as f64 / (points + 1) as f64;
        check.total += 1;
        if bootstrap_f(a, 2.0, alpha, delta)? > a + GRID_GUARD {
            check.passed += 1;
        } else {
            check.failures.push((a, 2.0));
        }
    }
    Ok(check)
}

/// Largest alpha on `alpha_grid` for which the improvement sweep passes at
/// every grid point, or `None` if all fail.
pub fn largest_passing_alpha(
    delta: usize,
    alpha_grid: &[f64],
    step: f64,
) -> Result<Option<f64>, AnalysisError> {
    let mut best = None;
    for &alpha in alpha_grid {
        if improvement_grid(alpha, delta, step)?.all_passed() {
            best = Some(best.map_or(alpha, |b: f64| b.max(alpha)));
        }
    }
    Ok(best)
}

/// Finite-window estimates of the per-edge liminf and limsup of `x(t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    /// Time span the estimates were taken over.
    pub window: (f64, f64),
}

/// Per-edge min and max of the normalized weights over the trailing window
/// `[window_fraction * t_end, t_end]` of the series.
pub fn estimate_limits(
    series: &SnapshotSeries,
    window_fraction: f64,
) -> Result<LimitEstimate, AnalysisError> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(AnalysisError::BadWindowFraction(window_fraction));
    }
    let times = series.times();
    let t_end = times.last().copied().unwrap_or(0.0);
    let t_lo = window_fraction * t_end;
    let in_window: Vec<usize> = (0..series.len()).filter(|&j| times[j] >= t_lo).collect();
    if in_window.len() < 2 {
        return Err(AnalysisError::WindowTooSmall(in_window.len()));
    }
    let edges = series.edge_count();
    let mut x_minus = vec![f64::INFINITY; edges];
    let mut x_plus = vec![f64::NEG_INFINITY; edges];
    for &j in &in_window {
        for (e, x) in series.x_at(j).into_iter().enumerate() {
            x_minus[e] = x_minus[e].min(x);
            x_plus[e] = x_plus[e].max(x);
        }
    }
    Ok(LimitEstimate {
        x_minus,
        x_plus,
        window: (times[in_window[0]], t_end),
    })
}

/// Edges whose neighborhood (including the edge itself) contains some edge
/// with `x_minus / mu` below the threshold. Returned sorted by id.
pub fn unstable_edges(
    est: &LimitEstimate,
    mu: &[f64],
    g: &Graph,
    delta_threshold: f64,
) -> Result<Vec<EdgeId>, AnalysisError> {
    if !(delta_threshold > 0.0) {
        return Err(AnalysisError::BadThreshold(delta_threshold));
    }
    let edges = g.edge_count();
    if est.x_minus.len() != edges || mu.len() != edges {
        return Err(AnalysisError::Coverage {
            got: est.x_minus.len().min(mu.len()),
            expected: edges,
        });
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0)) {
        return Err(AnalysisError::NonPositiveMu(i));
    }
    let mut out = Vec::new();
    for e in 0..edges {
        let worst = g
            .edge_neighborhood(e)?
            .into_iter()
            .map(|n| est.x_minus[n] / mu[n])
            .fold(f64::INFINITY, f64::min);
        if worst < delta_threshold {
            out.push(e);
        }
    }
    Ok(out)
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Component sizes of the subgraph induced by the given edges, where two
/// edges are adjacent when they share a vertex. Sorted descending.
pub fn unstable_components(g: &Graph, unstable: &[EdgeId]) -> Vec<usize> {
    let mut index = vec![usize::MAX; g.edge_count()];
    for (i, &e) in unstable.iter().enumerate() {
        index[e] = i;
    }
    let mut sets = DisjointSets::new(unstable.len());
    for v in 0..g.vertex_count() {
        let mut first: Option<usize> = None;
        for &e in g.incident_edges(v).expect("in range") {
            if index[e] == usize::MAX {
                continue;
            }
            match first {
                None => first = Some(index[e]),
                Some(f) => sets.union(f, index[e]),
            }
        }
    }
    let mut sizes = vec![0usize; unstable.len()];
    for i in 0..unstable.len() {
        let root = sets.find(i);
        sizes[root] += 1;
    }
    let mut out: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Sup relative deviation from `mu` at every snapshot:
/// `D(t) = max_e |x(e)/mu(e) - 1|`.
pub fn convergence_report(
    series: &SnapshotSeries,
    mu: &[f64],
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    if series.edge_count() != mu.len() && !series.is_empty() {
        return Err(AnalysisError::Coverage {
            got: mu.len(),
            expected: series.edge_count(),
        });
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0)) {
        return Err(AnalysisError::NonPositiveMu(i));
    }
    Ok((0..series.len())
        .map(|j| {
            let d = series
                .x_at(j)
                .into_iter()
                .zip(mu)
                .map(|(x, m)| (x / m - 1.0).abs())
                .fold(0.0, f64::max);
            (series.times()[j], d)
        })
        .collect())
}

/// Renders a deviation series as `t,sup_deviation` CSV.
pub fn deviation_csv(report: &[(f64, f64)]) -> String {
    let mut out = String::from("t,sup_deviation\n");
    for (t, d) in report {
        out.push_str(&format!("{t},{d}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_fixed_point_at_two_over_delta() {
        for delta in 2..=6 {
            let c = 2.0 / delta as f64;
            for alpha in [0.0, 0.25, 0.5, 0.9] {
                let v = bootstrap_f(c, c, alpha, delta).unwrap();
                assert!((v - c).abs() <= 1e-14, "delta={delta} alpha={alpha}");
            }
        }
    }

    #[test]
    fn f_known_values() {
        assert!((bootstrap_f(0.25, 1.0, 0.5, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bootstrap_f(1.0, 1.0, 0.5, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bootstrap_f(2.0, 2.0, 0.5, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f_rejects_degenerate_degree_and_nonpositive_args() {
        assert!(matches!(
            bootstrap_f(1.0, 1.0, 0.5, 1),
            Err(AnalysisError::DegreeTooSmall(1))
        ));
        assert!(bootstrap_f(0.0, 1.0, 0.5, 2).is_err());
        assert!(bootstrap_f(1.0, -1.0, 0.5, 2).is_err());
    }

    #[test]
    fn f_is_monotone_in_both_arguments() {
        let alpha = 0.6;
        for delta in [2usize, 4] {
            let mut prev = 0.0;
            for i in 1..=40 {
                let v = bootstrap_f(0.05 * i as f64, 1.0, alpha, delta).unwrap();
                assert!(v > prev);
                prev = v;
            }
            let mut prev = f64::INFINITY;
            for i in 1..=40 {
                let v = bootstrap_f(1.0, 0.05 * i as f64, alpha, delta).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn auto_bracket_matches_closed_form() {
        let (a, b) = auto_bracket(0.5).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(b, 2.0);
        assert!(auto_bracket(1.0).is_err());
    }

    #[test]
    fn sequence_halves_the_log_ratio_on_degree_two() {
        let seq = bootstrap_sequence(0.5, 2, 0.5, 2.0, 50, 0.0).unwrap();
        let ratios: Vec<f64> = seq.brackets.iter().map(|(a, b)| b / a).collect();
        assert!((ratios[0] - 4.0).abs() < 1e-12);
        assert!((ratios[1] - 2.0).abs() < 1e-12);
        assert!((ratios[2] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sequence_is_constant_at_the_fixed_point() {
        let seq = bootstrap_sequence(0.7, 2, 1.0, 1.0, 20, 1e-15).unwrap();
        assert_eq!(seq.brackets, vec![(1.0, 1.0)]);
        assert!(seq.converged);
    }

    #[test]
    fn sequence_converges_within_budget_for_strong_alpha() {
        let seq = bootstrap_sequence(0.9, 2, 0.5, 2.0, 200, 1e-8).unwrap();
        assert!(seq.converged);
        assert!(seq.iterations() <= 200);
        let (a, b) = *seq.brackets.last().unwrap();
        assert!((a - 1.0).abs() < 1e-7 && (b - 1.0).abs() < 1e-7);
    }

    #[test]
    fn sequence_monotone_and_contracting() {
        for (alpha, delta, a1, b1) in [
            (0.3, 2, 0.74, 2.0),
            (0.6, 2, 0.35, 2.0),
            (0.51, 3, 0.6, 0.8),
        ] {
            let seq = bootstrap_sequence(alpha, delta, a1, b1, 500, 1e-10).unwrap();
            for w in seq.brackets.windows(2) {
                let ((a0, b0), (a1, b1)) = (w[0], w[1]);
                assert!(a1 >= a0 && b1 <= b0);
                if delta == 2 {
                    assert!(b1 / a1 <= (b0 / a0).powf(alpha) + GRID_GUARD);
                }
            }
        }
    }

    #[test]
    fn sequence_rejects_invalid_bracket() {
        assert!(matches!(
            bootstrap_sequence(0.5, 2, 1.5, 0.5, 10, 1e-8),
            Err(AnalysisError::InvalidBracket { .. })
        ));
        assert!(bootstrap_sequence(0.5, 3, 0.9, 1.5, 10, 1e-8).is_err()); // a1 > 2/3
    }

    #[test]
    fn improvement_check_examples() {
        assert!(improvement_check(0.1, 1.9, 0.51, 3).unwrap());
        // degree 2 improves everywhere in the open bracket
        for a in [0.05, 0.4, 0.95] {
            for b in [1.05, 1.5, 1.95] {
                assert!(improvement_check(a, b, 0.8, 2).unwrap());
            }
        }
        assert!(matches!(
            improvement_check(0.8, 1.9, 0.5, 3),
            Err(AnalysisError::BracketViolation { .. })
        ));
    }

    #[test]
    fn lower_threshold_examples() {
        assert!(lower_threshold_check(0.1, 0.5, 4).unwrap()); // below 0.125
        assert!(lower_threshold_check(0.4, 0.5, 2).unwrap()); // below 0.5
        assert!(!lower_threshold_check(2.0, 0.5, 2).unwrap()); // f(2,2) = 2/delta < 2
    }

    #[test]
    fn improvement_grid_all_pass_at_half_plus_eps() {
        let check = improvement_grid(0.51, 3, 0.01).unwrap();
        assert_eq!(check.total, 8778);
        assert!(check.all_passed(), "failures: {:?}", &check.failures[..3.min(check.failures.len())]);
    }

    #[test]
    fn improvement_grid_fails_for_large_alpha() {
        let check = improvement_grid(0.95, 3, 0.01).unwrap();
        assert!(!check.all_passed());
        assert!(!check.failures.is_empty());
    }

    #[test]
    fn dyadic_lower_bound_values() {
        assert_eq!(dyadic_lower_bound(1, 1, 0.5, 2), 0.25);
        assert_eq!(dyadic_lower_bound(7, 1, 0.5, 2), 0.25); // empty sum for l = 1
        assert!((dyadic_lower_bound(1, 2, 0.5, 2) - 0.42044820762685725).abs() < 1e-15);
        // a_{k,1} <= 1 for any degree
        for delta in [2usize, 3, 7] {
            for alpha in [0.1, 0.5, 0.9] {
                assert!(dyadic_lower_bound(4, 1, alpha, delta) <= 1.0);
            }
        }
    }

    #[test]
    fn dyadic_lower_bound_normalized_has_positive_limit() {
        // a_{k,l} 2^{-kl} decreases in l toward a positive limit
        for k in [2u32, 5, 8] {
            let mut prev = f64::INFINITY;
            let mut last = 0.0;
            for l in 1..=50 {
                let v = dyadic_lower_bound(k, l, 0.5, 4) * 2f64.powf(-(k as f64 * l as f64));
                assert!(v > 0.0);
                assert!(v <= prev);
                prev = v;
                last = v;
            }
            let analytic = 4f64.powf(-2.0) * 2f64.powf(-(k as f64) * (1.0 + 0.25 / 0.5));
            assert!((last - analytic).abs() / analytic < 1e-6);
        }
    }

    fn series_from(times: &[f64], rows: &[Vec<u64>]) -> SnapshotSeries {
        SnapshotSeries::from_rows(times.to_vec(), rows.to_vec()).unwrap()
    }

    #[test]
    fn estimate_limits_constant_series() {
        // x = 1 at both snapshots
        let s = series_from(&[10.0, 20.0], &[vec![10, 10], vec![20, 20]]);
        let est = estimate_limits(&s, 0.4).unwrap();
        assert_eq!(est.x_minus, vec![1.0, 1.0]);
        assert_eq!(est.x_plus, vec![1.0, 1.0]);
    }

    #[test]
    fn estimate_limits_min_max_over_window() {
        // single edge, x = 0.9, 1.1, 1.0 across the window
        let s = series_from(&[10.0, 20.0, 30.0], &[vec![9], vec![22], vec![30]]);
        let est = estimate_limits(&s, 0.25).unwrap();
        assert_eq!(est.x_minus, vec![0.9]);
        assert!((est.x_plus[0] - 1.1).abs() < 1e-15);
        assert_eq!(est.window, (10.0, 30.0));
    }

    #[test]
    fn estimate_limits_rejects_thin_windows() {
        let s = series_from(&[10.0, 20.0], &[vec![10], vec![20]]);
        assert!(matches!(
            estimate_limits(&s, 0.9),
            Err(AnalysisError::WindowTooSmall(1))
        ));
        assert!(estimate_limits(&s, 1.5).is_err());
    }

    fn exact_estimate(mu: &[f64]) -> LimitEstimate {
        LimitEstimate {
            x_minus: mu.to_vec(),
            x_plus: mu.to_vec(),
            window: (1.0, 2.0),
        }
    }

    #[test]
    fn no_unstable_edges_at_equilibrium() {
        let g = Graph::cycle(10).unwrap();
        let mu = vec![1.0; 10];
        let est = exact_estimate(&mu);
        assert!(unstable_edges(&est, &mu, &g, 0.5).unwrap().is_empty());
    }

    #[test]
    fn dead_edge_poisons_its_neighborhood() {
        let g = Graph::cycle(10).unwrap();
        let mu = vec![1.0; 10];
        let mut est = exact_estimate(&mu);
        est.x_minus[0] = 0.0;
        let unstable = unstable_edges(&est, &mu, &g, 0.5).unwrap();
        assert_eq!(unstable, vec![0, 1, 9]);
    }

    #[test]
    fn unstable_set_is_monotone_in_threshold() {
        let g = Graph::torus(2, 4).unwrap();
        let mu = vec![0.5; g.edge_count()];
        let mut est = exact_estimate(&mu);
        for (i, v) in est.x_minus.iter_mut().enumerate() {
            *v = 0.5 * (0.2 + 0.05 * (i % 13) as f64);
        }
        let mut prev: Vec<EdgeId> = Vec::new();
        for threshold in [0.1, 0.3, 0.5, 0.7] {
            let cur = unstable_edges(&est, &mu, &g, threshold).unwrap();
            assert!(prev.iter().all(|e| cur.contains(e)));
            prev = cur;
        }
    }

    #[test]
    fn components_of_unstable_subgraph() {
        let g = Graph::cycle(10).unwrap();
        assert!(unstable_components(&g, &[]).is_empty());
        // edges 0,1,2 form a path sharing vertices 1 and 2
        assert_eq!(unstable_components(&g, &[0, 1, 2]), vec![3]);
        // edges 0 and 5 are disjoint
        assert_eq!(unstable_components(&g, &[0, 5]), vec![1, 1]);
    }

    #[test]
    fn convergence_report_measures_relative_deviation() {
        let mu = vec![1.0, 2.0];
        let s = series_from(&[10.0], &[vec![11, 22]]); // x = 1.1 mu
        let report = convergence_report(&s, &mu).unwrap();
        assert_eq!(report.len(), 1);
        assert!((report[0].1 - 0.1).abs() < 1e-12);

        let s = series_from(&[10.0], &[vec![10, 20]]); // x = mu
        let report = convergence_report(&s, &mu).unwrap();
        assert_eq!(report[0].1, 0.0);

        assert!(convergence_report(&s, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn deviation_csv_shape() {
        let csv = deviation_csv(&[(100.0, 0.25), (200.0, 0.125)]);
        assert_eq!(csv, "t,sup_deviation\n100,0.25\n200,0.125\n");
    }
}
