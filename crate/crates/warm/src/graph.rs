//! Finite simple graphs with indexed edges and fixed incidence order.
//!
//! Edges are addressed by their position in the edge list. Each vertex keeps
//! an ordered list of incident edge ids, frozen at construction; this order
//! defines the cumulative mark partition used by the edge-selection rule, so
//! simulated trajectories are reproducible from a seed alone.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Attempts before the pairing-model sampler gives up on finding a simple graph.
const PAIRING_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cycle needs n >= 3, got {0} (smaller n would force a loop or parallel edge)")]
    CycleTooSmall(usize),
    #[error("torus side must be >= 3, got {0} (wrap-around would duplicate edges)")]
    TorusSideTooSmall(usize),
    #[error("torus dimension must be >= 1")]
    TorusDimensionZero,
    #[error("no {delta}-regular simple graph on {n} vertices: n*delta is odd")]
    OddDegreeSum { n: usize, delta: usize },
    #[error("degree {delta} out of range for {n} vertices")]
    DegreeOutOfRange { n: usize, delta: usize },
    #[error("pairing model produced no simple graph in {0} attempts")]
    PairingExhausted(usize),
    #[error("line {line}: expected two vertex ids, got {text:?}")]
    Parse { line: usize, text: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("graph has no edges")]
    NoEdges,
    #[error("edge {{{u}, {v}}} references a vertex >= vertex count {vertex_count}")]
    VertexOutOfRange {
        u: usize,
        v: usize,
        vertex_count: usize,
    },
    #[error("invalid edge id {0}")]
    InvalidEdge(EdgeId),
    #[error("invalid vertex id {0}")]
    InvalidVertex(VertexId),
}

/// An immutable finite simple graph.
///
/// Safe to share across threads; all dynamics operate on separate weight
/// vectors and only read the topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    incidence: Vec<Vec<EdgeId>>,
    max_degree: usize,
    regular: bool,
}

/// Compact description emitted as JSON by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub regular: bool,
}

impl Graph {
    /// Builds a graph from an explicit edge list on vertices `0..vertex_count`.
    ///
    /// Rejects self-loops, duplicate edges (in either orientation) and
    /// out-of-range endpoints. Incidence lists record edges in input order.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut incidence = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            let line = id + 1;
            if u >= vertex_count || v >= vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    u,
                    v,
                    vertex_count,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            incidence[u].push(id);
            incidence[v].push(id);
        }
        let max_degree = incidence.iter().map(Vec::len).max().unwrap_or(0);
        let regular = incidence.iter().all(|adj| adj.len() == max_degree);
        Ok(Self {
            vertex_count,
            edges: edges.to_vec(),
            incidence,
            max_degree,
            regular,
        })
    }

    /// The cycle on `n` vertices; edge `i` connects `i` and `(i + 1) % n`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::CycleTooSmall(n));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    /// The `d`-dimensional discrete torus with side `n`: `n^d` vertices of
    /// degree `2d`, periodic in every direction.
    ///
    /// Vertices are indexed little-endian in their coordinates, and each
    /// vertex contributes its `d` "+1" edges in dimension order, so
    /// `torus(1, n)` is edge-for-edge identical to `cycle(n)`.
    pub fn torus(d: usize, n: usize) -> Result<Self, GraphError> {
        if d == 0 {
            return Err(GraphError::TorusDimensionZero);
        }
        if n < 3 {
            return Err(GraphError::TorusSideTooSmall(n));
        }
        let vertex_count = n.checked_pow(d as u32).expect("torus too large");
        let mut edges = Vec::with_capacity(d * vertex_count);
        let mut stride = 1;
        let strides: Vec<usize> = (0..d)
            .map(|_| {
                let s = stride;
                stride *= n;
                s
            })
            .collect();
        for v in 0..vertex_count {
            for dim in 0..d {
                let coord = (v / strides[dim]) % n;
                let neighbor = if coord + 1 == n {
                    v - coord * strides[dim]
                } else {
                    v + strides[dim]
                };
                edges.push((v, neighbor));
            }
        }
        Self::from_edges(vertex_count, &edges)
    }

    /// Samples a simple `delta`-regular graph on `n` vertices via the pairing
    /// model: shuffle `n * delta` half-edges, pair them off, resample on
    /// loops or parallel edges. Reproducible from the seed.
    pub fn random_regular(n: usize, delta: usize, seed: u64) -> Result<Self, GraphError> {
        if delta == 0 || delta >= n {
            return Err(GraphError::DegreeOutOfRange { n, delta });
        }
        if (n * delta) % 2 != 0 {
            return Err(GraphError::OddDegreeSum { n, delta });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut half_edges: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat(v).take(delta)).collect();
        'attempt: for _ in 0..PAIRING_ATTEMPTS {
            half_edges.shuffle(&mut rng);
            let mut seen = HashSet::with_capacity(n * delta / 2);
            let mut edges = Vec::with_capacity(n * delta / 2);
            for pair in half_edges.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v || !seen.insert((u.min(v), u.max(v))) {
                    continue 'attempt;
                }
                edges.push((u, v));
            }
            return Self::from_edges(n, &edges);
        }
        Err(GraphError::PairingExhausted(PAIRING_ATTEMPTS))
    }

    /// Parses an edge-list document: one `u v` pair per line, `#` comments and
    /// blank lines ignored. Sparse vertex ids are compacted in sorted order.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut raw: Vec<(usize, usize, usize)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let (u, v) = match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), None) => {
                    let parse = |s: &str| {
                        s.parse::<usize>().map_err(|_| GraphError::Parse {
                            line: line_no,
                            text: content.to_string(),
                        })
                    };
                    (parse(a)?, parse(b)?)
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        text: content.to_string(),
                    })
                }
            };
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: line_no,
                    vertex: u,
                });
            }
            raw.push((line_no, u, v));
        }
        if raw.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let mut ids: Vec<usize> = raw.iter().flat_map(|&(_, u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        let compact = |id: usize| ids.binary_search(&id).expect("id collected above");
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(raw.len());
        for &(line, u, v) in &raw {
            let (cu, cv) = (compact(u), compact(v));
            if !seen.insert((cu.min(cv), cu.max(cv))) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            edges.push((cu, cv));
        }
        Self::from_edges(ids.len(), &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints of edge `e`.
    pub fn endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId), GraphError> {
        self.edges.get(e).copied().ok_or(GraphError::InvalidEdge(e))
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Incident edge ids of `v` in construction order.
    pub fn incident_edges(&self, v: VertexId) -> Result<&[EdgeId], GraphError> {
        self.incidence
            .get(v)
            .map(Vec::as_slice)
            .ok_or(GraphError::InvalidVertex(v))
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        Ok(self.incident_edges(v)?.len())
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// True when every vertex has degree exactly `max_degree`.
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// All edges sharing at least one endpoint with `e`, including `e` itself.
    ///
    /// Returned sorted by edge id. Symmetric: `e'` is in the neighborhood of
    /// `e` exactly when `e` is in the neighborhood of `e'`.
    pub fn edge_neighborhood(&self, e: EdgeId) -> Result<Vec<EdgeId>, GraphError> {
        let (u, v) = self.endpoints(e)?;
        let mut out: Vec<EdgeId> = self.incidence[u]
            .iter()
            .chain(self.incidence[v].iter())
            .copied()
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            vertex_count: self.vertex_count,
            edge_count: self.edges.len(),
            max_degree: self.max_degree,
            regular: self.regular,
        }
    }

    /// Re-checks every structural invariant. Builders always produce valid
    /// graphs; this exists so tests and file loaders can assert it.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut seen = HashSet::new();
        let mut degrees = vec![0usize; self.vertex_count];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if u >= self.vertex_count || v >= self.vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    u,
                    v,
                    vertex_count: self.vertex_count,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: id + 1,
                    vertex: u,
                });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { line: id + 1, u, v });
            }
            degrees[u] += 1;
            degrees[v] += 1;
            // each edge id must appear in exactly its endpoints' incidence lists
            if !self.incidence[u].contains(&id) || !self.incidence[v].contains(&id) {
                return Err(GraphError::InvalidEdge(id));
            }
        }
        let true_max = degrees.iter().copied().max().unwrap_or(0);
        if true_max != self.max_degree
            || self
                .incidence
                .iter()
                .zip(&degrees)
                .any(|(adj, &d)| adj.len() != d)
        {
            return Err(GraphError::NoEdges);
        }
        if self.regular != degrees.iter().all(|&d| d == self.max_degree) {
            return Err(GraphError::NoEdges);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_smallest_is_triangle() {
        let g = Graph::cycle(3).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(g.is_regular());
        assert_eq!(g.max_degree(), 2);
        g.validate().unwrap();
    }

    #[test]
    fn cycle_edges_follow_definition() {
        let g = Graph::cycle(4).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    }

    #[test]
    fn cycle_large() {
        let g = Graph::cycle(100).unwrap();
        assert_eq!(g.edge_count(), 100);
        assert!(g.is_regular());
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn cycle_rejects_small_n() {
        assert!(Graph::cycle(2).is_err());
        assert!(Graph::cycle(0).is_err());
    }

    #[test]
    fn torus_1d_equals_cycle() {
        let t = Graph::torus(1, 5).unwrap();
        let c = Graph::cycle(5).unwrap();
        assert_eq!(t.edges(), c.edges());
        assert_eq!(t, c);
    }

    #[test]
    fn torus_2d_counts() {
        let g = Graph::torus(2, 3).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 18);
        assert_eq!(g.max_degree(), 4);
        assert!(g.is_regular());
        g.validate().unwrap();

        let g = Graph::torus(2, 20).unwrap();
        assert_eq!(g.vertex_count(), 400);
        assert_eq!(g.edge_count(), 800);
    }

    #[test]
    fn torus_rejects_bad_params() {
        assert!(Graph::torus(0, 5).is_err());
        assert!(Graph::torus(2, 2).is_err());
    }

    #[test]
    fn regular_edge_count_identity() {
        for (g, delta) in [
            (Graph::cycle(17).unwrap(), 2),
            (Graph::torus(2, 5).unwrap(), 4),
            (Graph::torus(3, 3).unwrap(), 6),
        ] {
            assert!(g.is_regular());
            assert_eq!(2 * g.edge_count(), delta * g.vertex_count());
        }
    }

    #[test]
    fn random_regular_4_vertices_degree_3_is_k4() {
        let g = Graph::random_regular(4, 3, 42).unwrap();
        assert_eq!(g.edge_count(), 6);
        let mut pairs: Vec<_> = g
            .edges()
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn random_regular_counts_and_validity() {
        let g = Graph::random_regular(50, 4, 7).unwrap();
        assert_eq!(g.edge_count(), 100);
        assert!(g.is_regular());
        assert_eq!(g.max_degree(), 4);
        g.validate().unwrap();
    }

    #[test]
    fn random_regular_rejects_odd_product() {
        assert!(matches!(
            Graph::random_regular(5, 3, 1),
            Err(GraphError::OddDegreeSum { .. })
        ));
    }

    #[test]
    fn random_regular_is_seed_deterministic() {
        let a = Graph::random_regular(30, 3, 99).unwrap();
        let b = Graph::random_regular(30, 3, 99).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = Graph::random_regular(30, 3, 100).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn edge_list_single_edge() {
        let g = Graph::from_edge_list("0 1").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn edge_list_path() {
        let g = Graph::from_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.degree(1).unwrap(), 2);
        assert_eq!(g.max_degree(), 2);
        assert!(!g.is_regular());
    }

    #[test]
    fn edge_list_rejects_self_loop() {
        assert!(matches!(
            Graph::from_edge_list("0 0"),
            Err(GraphError::SelfLoop { line: 1, vertex: 0 })
        ));
    }

    #[test]
    fn edge_list_rejects_duplicates_with_line() {
        let err = Graph::from_edge_list("0 1\n2 3\n1 0").unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEdge { line: 3, .. }));
    }

    #[test]
    fn edge_list_parse_error_carries_line() {
        let err = Graph::from_edge_list("0 1\nx y").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
    }

    #[test]
    fn edge_list_compacts_sparse_ids_and_skips_comments() {
        let g = Graph::from_edge_list("# a comment\n10 30\n\n30 50 # trailing\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn neighborhood_on_cycle() {
        let g = Graph::cycle(5).unwrap();
        // edge 0 = {0,1}: itself, {4,0} = edge 4, {1,2} = edge 1
        assert_eq!(g.edge_neighborhood(0).unwrap(), vec![0, 1, 4]);
    }

    #[test]
    fn neighborhood_single_edge_is_self() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_neighborhood(0).unwrap(), vec![0]);
    }

    #[test]
    fn neighborhood_on_2d_torus_has_seven_edges() {
        let g = Graph::torus(2, 5).unwrap();
        for e in 0..g.edge_count() {
            assert_eq!(g.edge_neighborhood(e).unwrap().len(), 7);
        }
    }

    #[test]
    fn neighborhood_is_symmetric() {
        let g = Graph::random_regular(20, 3, 5).unwrap();
        for e in 0..g.edge_count() {
            for other in g.edge_neighborhood(e).unwrap() {
                assert!(g.edge_neighborhood(other).unwrap().contains(&e));
            }
        }
    }

    #[test]
    fn neighborhood_rejects_bad_id() {
        let g = Graph::cycle(3).unwrap();
        assert!(g.edge_neighborhood(3).is_err());
    }

    #[test]
    fn builders_produce_valid_graphs() {
        Graph::cycle(9).unwrap().validate().unwrap();
        Graph::torus(3, 4).unwrap().validate().unwrap();
        Graph::random_regular(16, 5, 3).unwrap().validate().unwrap();
        Graph::from_edge_list("0 1\n1 2\n2 0").unwrap().validate().unwrap();
    }

    #[test]
    fn summary_reports_shape() {
        let s = Graph::torus(2, 4).unwrap().summary();
        assert_eq!(s.vertex_count, 16);
        assert_eq!(s.edge_count, 32);
        assert_eq!(s.max_degree, 4);
        assert!(s.regular);
    }
}
