//! Continuous-time reinforcement dynamics on a graph.
//!
//! Every vertex carries an independent rate-1 Poisson clock. When the clock
//! of vertex `v` rings, one incident edge is selected with probability
//! proportional to its current weight raised to `alpha`, and that weight is
//! incremented by 1. All weights start at 1.
//!
//! The engine realizes this by superposition: holding times are exponential
//! with rate `|V|`, the firing vertex is uniform, and a single uniform mark
//! on `[0, 1]` is pushed through the cumulative selection partition in
//! incidence order. This is distributionally identical to per-vertex clocks
//! and needs one RNG stream, which keeps trajectories reproducible and
//! checkpointable.
//!
//! Per event the engine draws, in this order: the holding time, the firing
//! vertex, the selection mark (skipped for isolated vertices). Checkpoints
//! are cut at event boundaries so a resumed run replays the identical draw
//! sequence.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, GraphError, VertexId};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;
pub const SNAPSHOT_CSV_HEADER: &str = "t,edge_id,weight,x";

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("alpha must be nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error("alpha = {0} is outside the weak-reinforcement range [0, 1); set the strong-alpha override to simulate anyway")]
    StrongAlphaWithoutOverride(f64),
    #[error("t_max must be finite and nonnegative, got {0}")]
    BadHorizon(f64),
    #[error("snapshot times must be strictly increasing and lie in (0, t_max]")]
    BadSchedule,
    #[error("vertex {0} is isolated; it has no edge to reinforce")]
    IsolatedVertex(VertexId),
    #[error("time-normalized weights need t > 0")]
    ZeroTime,
    #[error("weights must be >= 1")]
    WeightBelowOne,
    #[error("checkpoint schema version {0} is not supported")]
    BadSchemaVersion(u32),
    #[error("checkpoint does not match this run: {0}")]
    BadCheckpoint(String),
    #[error("snapshot csv, line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Live state of the urn network: current time and per-edge integer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightState {
    t: f64,
    weights: Vec<u64>,
    event_count: u64,
}

impl WeightState {
    /// Fresh state at time 0 with every weight initialized to 1.
    pub fn new(g: &Graph) -> Self {
        Self {
            t: 0.0,
            weights: vec![1; g.edge_count()],
            event_count: 0,
        }
    }

    /// State with explicit weights; the event count is recovered from the
    /// surplus over the all-ones initialization.
    pub fn from_weights(t: f64, weights: Vec<u64>) -> Result<Self, DynamicsError> {
        if weights.iter().any(|&w| w == 0) {
            return Err(DynamicsError::WeightBelowOne);
        }
        let event_count = weights.iter().map(|&w| w - 1).sum();
        Ok(Self {
            t,
            weights,
            event_count,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    fn increment(&mut self, e: EdgeId) {
        self.weights[e] += 1;
        self.event_count += 1;
    }
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Reinforcement exponent; weak reinforcement means `alpha < 1`.
    pub alpha: f64,
    /// Simulation horizon.
    pub t_max: f64,
    /// Root seed of the single RNG stream.
    pub seed: u64,
    /// Observation times; empty means a single snapshot at `t_max`.
    pub snapshot_times: Vec<f64>,
    /// Permits `alpha >= 1` for strong-reinforcement demos.
    #[serde(default)]
    pub allow_strong_alpha: bool,
    /// Maintain incremental per-vertex weight-power sums for selection
    /// denominators instead of summing on demand.
    #[serde(default)]
    pub use_weight_cache: bool,
}

impl SimConfig {
    pub fn new(alpha: f64, t_max: f64, seed: u64) -> Self {
        Self {
            alpha,
            t_max,
            seed,
            snapshot_times: Vec::new(),
            allow_strong_alpha: false,
            use_weight_cache: false,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.alpha >= 0.0) {
            return Err(DynamicsError::NegativeAlpha(self.alpha));
        }
        if self.alpha >= 1.0 && !self.allow_strong_alpha {
            return Err(DynamicsError::StrongAlphaWithoutOverride(self.alpha));
        }
        if !self.t_max.is_finite() || self.t_max < 0.0 {
            return Err(DynamicsError::BadHorizon(self.t_max));
        }
        let mut prev = 0.0;
        for &s in &self.snapshot_times {
            if !(s > prev && s <= self.t_max) {
                return Err(DynamicsError::BadSchedule);
            }
            prev = s;
        }
        Ok(())
    }
}

/// Geometric observation schedule `t0, t0*ratio, ...` capped at `t_max`,
/// with `t_max` itself always included as the final time.
pub fn dyadic_schedule(t0: f64, ratio: f64, t_max: f64) -> Result<Vec<f64>, DynamicsError> {
    if !(t0 > 0.0) || !(ratio > 1.0) {
        return Err(DynamicsError::BadSchedule);
    }
    if !(t_max > 0.0) {
        return Ok(Vec::new());
    }
    let mut times = Vec::new();
    let mut t = t0;
    while t < t_max {
        times.push(t);
        t *= ratio;
    }
    times.push(t_max);
    Ok(times)
}

/// One firing: elapsed holding time, the vertex whose clock rang, and the
/// reinforced edge (`None` when the vertex is isolated, a no-op firing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiredEvent {
    pub dt: f64,
    pub vertex: VertexId,
    pub edge: Option<EdgeId>,
}

/// Selection law of a firing at `v`: probability `weights[e]^alpha / sum` for
/// each incident edge, in incidence order.
pub fn selection_probabilities(
    state: &WeightState,
    g: &Graph,
    v: VertexId,
    alpha: f64,
) -> Result<Vec<f64>, DynamicsError> {
    let inc = g.incident_edges(v)?;
    if inc.is_empty() {
        return Err(DynamicsError::IsolatedVertex(v));
    }
    let pows: Vec<f64> = inc
        .iter()
        .map(|&e| (state.weights[e] as f64).powf(alpha))
        .collect();
    let total: f64 = pows.iter().sum();
    Ok(pows.into_iter().map(|p| p / total).collect())
}

/// Time-normalized weights `x(e) = weight(e) / t`.
pub fn normalized_weights(state: &WeightState) -> Result<Vec<f64>, DynamicsError> {
    if !(state.t > 0.0) {
        return Err(DynamicsError::ZeroTime);
    }
    Ok(state.weights.iter().map(|&w| w as f64 / state.t).collect())
}

fn holding_time(rng: &mut ChaCha8Rng, vertex_count: usize) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / vertex_count as f64
}

/// Walks the cumulative partition of `[0, 1]` over `inc` and returns the edge
/// whose interval contains the mark `u`. `denom` is the power sum over `inc`.
fn pick_edge(weights: &[u64], inc: &[EdgeId], alpha: f64, denom: f64, u: f64) -> EdgeId {
    let mut acc = 0.0;
    for &e in inc {
        acc += (weights[e] as f64).powf(alpha) / denom;
        if u <= acc {
            return e;
        }
    }
    // the partition can fall short of 1.0 by roundoff
    *inc.last().expect("nonempty incidence")
}

fn pow_sum(weights: &[u64], inc: &[EdgeId], alpha: f64) -> f64 {
    inc.iter().map(|&e| (weights[e] as f64).powf(alpha)).sum()
}

/// Advances the state by exactly one firing, with no horizon cutoff.
pub fn step(
    state: &mut WeightState,
    g: &Graph,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> FiredEvent {
    let dt = holding_time(rng, g.vertex_count());
    state.t += dt;
    let vertex = rng.gen_range(0..g.vertex_count());
    let inc = g.incident_edges(vertex).expect("vertex id in range");
    let edge = if inc.is_empty() {
        None
    } else {
        let u: f64 = rng.gen();
        let denom = pow_sum(&state.weights, inc, alpha);
        let e = pick_edge(&state.weights, inc, alpha, denom, u);
        state.increment(e);
        Some(e)
    };
    FiredEvent { dt, vertex, edge }
}

/// Time-indexed records of the per-edge weights, kept as integers so the
/// normalized values can be reproduced exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnapshotSeries {
    times: Vec<f64>,
    weight_rows: Vec<Vec<u64>>,
}

impl SnapshotSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weight_rows(&self) -> &[Vec<u64>] {
        &self.weight_rows
    }

    pub fn edge_count(&self) -> usize {
        self.weight_rows.first().map_or(0, Vec::len)
    }

    /// Normalized weights `x = w / t` at snapshot index `j`.
    pub fn x_at(&self, j: usize) -> Vec<f64> {
        let t = self.times[j];
        self.weight_rows[j].iter().map(|&w| w as f64 / t).collect()
    }

    pub fn final_x(&self) -> Option<Vec<f64>> {
        if self.is_empty() {
            None
        } else {
            Some(self.x_at(self.len() - 1))
        }
    }

    fn push(&mut self, t: f64, weights: &[u64]) {
        debug_assert!(self.times.last().map_or(true, |&prev| t > prev));
        self.times.push(t);
        self.weight_rows.push(weights.to_vec());
    }

    /// Renders the series as `t,edge_id,weight,x` CSV, one row per snapshot
    /// and edge. Floats use the shortest round-trip representation, so equal
    /// series always serialize to identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SNAPSHOT_CSV_HEADER);
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.weight_rows) {
            for (e, &w) in row.iter().enumerate() {
                let x = w as f64 / t;
                out.push_str(&format!("{t},{e},{w},{x}\n"));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, DynamicsError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == SNAPSHOT_CSV_HEADER => {}
            _ => {
                return Err(DynamicsError::Csv {
                    line: 1,
                    message: format!("expected header {SNAPSHOT_CSV_HEADER:?}"),
                })
            }
        }
        let mut series = Self::default();
        let mut current_t: Option<f64> = None;
        let mut row: Vec<u64> = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(DynamicsError::Csv {
                    line: line_no,
                    message: "expected 4 fields".into(),
                });
            }
            let bad = |message: &str| DynamicsError::Csv {
                line: line_no,
                message: message.into(),
            };
            let t: f64 = fields[0].parse().map_err(|_| bad("bad time"))?;
            let e: usize = fields[1].parse().map_err(|_| bad("bad edge id"))?;
            let w: u64 = fields[2].parse().map_err(|_| bad("bad weight"))?;
            if current_t != Some(t) {
                if let Some(prev) = current_t {
                    if t <= prev {
                        return Err(bad("snapshot times must increase"));
                    }
                    series.push(prev, &row);
                }
                current_t = Some(t);
                row.clear();
            }
            if e != row.len() {
                return Err(bad("edge ids must run 0..edge_count per snapshot"));
            }
            row.push(w);
        }
        if let Some(t) = current_t {
            series.push(t, &row);
        }
        if !series
            .weight_rows
            .iter()
            .all(|r| r.len() == series.edge_count())
        {
            return Err(DynamicsError::Csv {
                line: 0,
                message: "snapshots cover different edge counts".into(),
            });
        }
        Ok(series)
    }
}

/// End-of-run digest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub alpha: f64,
    pub t_max: f64,
    pub event_count: u64,
    pub max_x: f64,
    pub min_x: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RngCheckpoint {
    seed: [u8; 32],
    stream: u64,
    word_pos: u128,
}

/// Complete mid-run state: resuming from a checkpoint and running to the
/// horizon is bit-identical to the unbroken run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config: SimConfig,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub t: f64,
    pub weights: Vec<u64>,
    pub event_count: u64,
    rng: RngCheckpoint,
    next_snapshot: usize,
    series_times: Vec<f64>,
    series_weights: Vec<Vec<u64>>,
    pow_sums: Option<Vec<f64>>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DynamicsError> {
        let ck: Self = serde_json::from_str(text)
            .map_err(|e| DynamicsError::BadCheckpoint(e.to_string()))?;
        if ck.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(DynamicsError::BadSchemaVersion(ck.schema_version));
        }
        Ok(ck)
    }
}

/// Event loop for one trajectory. Owns its RNG stream, the weight state and
/// the accumulated snapshot series.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: Graph,
    config: SimConfig,
    state: WeightState,
    rng: ChaCha8Rng,
    schedule: Vec<f64>,
    next_snapshot: usize,
    series: SnapshotSeries,
    /// Incremental per-vertex sums of `w^alpha`, when enabled.
    pow_sums: Option<Vec<f64>>,
    done: bool,
}

impl Simulation {
    pub fn new(g: &Graph, config: SimConfig) -> Result<Self, DynamicsError> {
        config.validate()?;
        let state = WeightState::new(g);
        let schedule = if config.t_max == 0.0 {
            Vec::new()
        } else if config.snapshot_times.is_empty() {
            vec![config.t_max]
        } else {
            config.snapshot_times.clone()
        };
        let pow_sums = config.use_weight_cache.then(|| {
            (0..g.vertex_count())
                .map(|v| pow_sum(state.weights(), g.incident_edges(v).unwrap(), config.alpha))
                .collect()
        });
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            graph: g.clone(),
            done: config.t_max == 0.0,
            config,
            state,
            rng,
            schedule,
            next_snapshot: 0,
            series: SnapshotSeries::default(),
            pow_sums,
        })
    }

    pub fn state(&self) -> &WeightState {
        &self.state
    }

    pub fn series(&self) -> &SnapshotSeries {
        &self.series
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn flush_snapshots_below(&mut self, cutoff: f64, inclusive: bool) {
        while self.next_snapshot < self.schedule.len() {
            let s = self.schedule[self.next_snapshot];
            if s < cutoff || (inclusive && s == cutoff) {
                self.series.push(s, self.state.weights());
                self.next_snapshot += 1;
            } else {
                break;
            }
        }
    }

    /// Applies one firing. Returns `false` once the horizon is reached; the
    /// final state then sits exactly at `t_max` with every event up to and
    /// including `t_max` applied.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        let dt = holding_time(&mut self.rng, self.graph.vertex_count());
        let te = self.state.t + dt;
        if te > self.config.t_max {
            self.flush_snapshots_below(self.config.t_max, true);
            self.state.t = self.config.t_max;
            self.done = true;
            return false;
        }
        self.flush_snapshots_below(te, false);
        self.state.t = te;
        let vertex = self.rng.gen_range(0..self.graph.vertex_count());
        let inc = self.graph.incident_edges(vertex).expect("in range");
        if !inc.is_empty() {
            let u: f64 = self.rng.gen();
            let alpha = self.config.alpha;
            let denom = match &self.pow_sums {
                Some(sums) => sums[vertex],
                None => pow_sum(self.state.weights(), inc, alpha),
            };
            let e = pick_edge(self.state.weights(), inc, alpha, denom, u);
            let old = self.state.weights[e] as f64;
            self.state.increment(e);
            if let Some(sums) = &mut self.pow_sums {
                let delta = (old + 1.0).powf(alpha) - old.powf(alpha);
                let (a, b) = self.graph.endpoints(e).expect("valid edge");
                sums[a] += delta;
                sums[b] += delta;
            }
        }
        true
    }

    /// Runs to the horizon and returns the recorded series.
    pub fn run(&mut self) -> &SnapshotSeries {
        while self.advance() {}
        &self.series
    }

    /// Applies at most `max_events` firings; stops early at the horizon.
    /// Returns the number actually applied.
    pub fn run_events(&mut self, max_events: u64) -> u64 {
        let mut n = 0;
        while n < max_events && self.advance() {
            n += 1;
        }
        n
    }

    pub fn summary(&self) -> Result<RunSummary, DynamicsError> {
        let x = normalized_weights(&self.state)?;
        let max_x = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(RunSummary {
            seed: self.config.seed,
            alpha: self.config.alpha,
            t_max: self.config.t_max,
            event_count: self.state.event_count,
            max_x,
            min_x,
        })
    }

    /// Snapshot of the full engine state at the current event boundary.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            config: self.config.clone(),
            vertex_count: self.graph.vertex_count(),
            edge_count: self.graph.edge_count(),
            t: self.state.t,
            weights: self.state.weights.clone(),
            event_count: self.state.event_count,
            rng: RngCheckpoint {
                seed: self.rng.get_seed(),
                stream: self.rng.get_stream(),
                word_pos: self.rng.get_word_pos(),
            },
            next_snapshot: self.next_snapshot,
            series_times: self.series.times.clone(),
            series_weights: self.series.weight_rows.clone(),
            pow_sums: self.pow_sums.clone(),
        }
    }

    /// Reconstructs an engine from a checkpoint taken on the same graph.
    pub fn resume(g: &Graph, ck: &Checkpoint) -> Result<Self, DynamicsError> {
        if ck.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(DynamicsError::BadSchemaVersion(ck.schema_version));
        }
        if ck.vertex_count != g.vertex_count() || ck.edge_count != g.edge_count() {
            return Err(DynamicsError::BadCheckpoint(format!(
                "graph has {}/{} vertices/edges, checkpoint was taken on {}/{}",
                g.vertex_count(),
                g.edge_count(),
                ck.vertex_count,
                ck.edge_count
            )));
        }
        ck.config.validate()?;
        if ck.weights.len() != g.edge_count() {
            return Err(DynamicsError::BadCheckpoint(
                "weight vector length does not match edge count".into(),
            ));
        }
        let state = WeightState::from_weights(ck.t, ck.weights.clone())?;
        if state.event_count != ck.event_count {
            return Err(DynamicsError::BadCheckpoint(
                "event count is inconsistent with the weights".into(),
            ));
        }
        let mut rng = ChaCha8Rng::from_seed(ck.rng.seed);
        rng.set_stream(ck.rng.stream);
        rng.set_word_pos(ck.rng.word_pos);
        let schedule = if ck.config.t_max == 0.0 {
            Vec::new()
        } else if ck.config.snapshot_times.is_empty() {
            vec![ck.config.t_max]
        } else {
            ck.config.snapshot_times.clone()
        };
        let mut series = SnapshotSeries::default();
        for (t, row) in ck.series_times.iter().zip(&ck.series_weights) {
            series.push(*t, row);
        }
        Ok(Self {
            graph: g.clone(),
            done: ck.t >= ck.config.t_max,
            config: ck.config.clone(),
            state,
            rng,
            schedule,
            next_snapshot: ck.next_snapshot,
            series,
            pow_sums: ck.pow_sums.clone(),
        })
    }

    /// Current selection denominator at `v`, recomputed directly. Used to
    /// cross-check the incremental cache.
    pub fn direct_pow_sum(&self, v: VertexId) -> Result<f64, DynamicsError> {
        let inc = self.graph.incident_edges(v)?;
        Ok(pow_sum(self.state.weights(), inc, self.config.alpha))
    }

    /// Cached selection denominator at `v`, when the cache is enabled.
    pub fn cached_pow_sum(&self, v: VertexId) -> Option<f64> {
        self.pow_sums.as_ref().map(|s| s[v])
    }
}
