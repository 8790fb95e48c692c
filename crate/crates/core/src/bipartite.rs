//! The bipartite inflation of a factorization pair.
//!
//! A witness `A = RS`, `B = SR` gives a bipartite graph on the disjoint
//! vertex sets of the two sides, with `R(v,w)` edges v -> w and `S(w,v)`
//! edges w -> v. Length-two paths starting on either side recover the two
//! original graphs, and that recovery is the combinatorial engine behind
//! both the sliding-block conjugacy and the corner certificate.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Edge, Graph, VertexSet};
use crate::matrix::Matrix;
use crate::report::Report;
use crate::sse::EsseWitness;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BipartiteError {
    #[error("R is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    RShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("S is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    SShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("vertex id {0:?} appears on both sides (or twice on one side)")]
    IdCollision(String),
    #[error("edge id {0:?} collides; vertex names must not recreate it")]
    EdgeIdCollision(String),
    #[error("side has no vertices")]
    EmptySide,
}

/// Which half of the inflation a recovery targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    E,
    F,
}

/// The bipartite graph G built from a witness, with its two-sided vertex
/// partition and the R/S origin of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteInflation {
    graph: Graph,
    e_vertices: Vec<String>,
    f_vertices: Vec<String>,
    r_edge_ids: Vec<String>,
    s_edge_ids: Vec<String>,
}

impl BipartiteInflation {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Vertex ids of the E side, in matrix row order.
    pub fn e_vertices(&self) -> &[String] {
        &self.e_vertices
    }

    pub fn f_vertices(&self) -> &[String] {
        &self.f_vertices
    }

    pub fn e_vertex_set(&self) -> VertexSet {
        VertexSet::from_ids(self.e_vertices.iter().cloned())
    }

    pub fn f_vertex_set(&self) -> VertexSet {
        VertexSet::from_ids(self.f_vertices.iter().cloned())
    }

    /// Edges contributed by R, i.e. the subgraph G_R.
    pub fn r_edge_ids(&self) -> &[String] {
        &self.r_edge_ids
    }

    /// Edges contributed by S, i.e. the subgraph G_S.
    pub fn s_edge_ids(&self) -> &[String] {
        &self.s_edge_ids
    }

    pub fn is_r_edge(&self, id: &str) -> bool {
        self.r_edge_ids.iter().any(|e| e == id)
    }
}

/// Explicit pairing of each recovered edge with the length-two path it
/// abbreviates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathBijection {
    forward: BTreeMap<String, (String, String)>,
    inverse: BTreeMap<(String, String), String>,
}

impl PathBijection {
    fn insert(&mut self, edge: String, path: (String, String)) {
        self.inverse.insert(path.clone(), edge.clone());
        self.forward.insert(edge, path);
    }

    /// Builds a bijection from explicit (edge, path) pairs. Normally the
    /// bijection comes out of [`recover_side`]; this is for assembling or
    /// perturbing one by hand.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (String, (String, String))>,
    {
        let mut bijection = PathBijection::default();
        for (edge, path) in pairs {
            bijection.insert(edge, path);
        }
        bijection
    }

    pub fn path_of(&self, edge: &str) -> Option<&(String, String)> {
        self.forward.get(edge)
    }

    pub fn edge_of(&self, first: &str, second: &str) -> Option<&String> {
        self.inverse.get(&(first.to_string(), second.to_string()))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(String, String))> {
        self.forward.iter()
    }

    /// Edge ids of the recovered graph, in id order.
    pub fn edges(&self) -> impl Iterator<Item = &String> {
        self.forward.keys()
    }
}

/// Builds the inflation with vertex order E side then F side, so its vertex
/// matrix is the block matrix [[0, R], [S, 0]]. Edge ids are deterministic:
/// the k-th R edge v -> w is `r_{v}_{w}_{k}`, the k-th S edge w -> v is
/// `s_{w}_{v}_{k}`.
pub fn build_bipartite(
    e_vertices: &[String],
    f_vertices: &[String],
    r: &Matrix,
    s: &Matrix,
) -> Result<BipartiteInflation, BipartiteError> {
    if e_vertices.is_empty() || f_vertices.is_empty() {
        return Err(BipartiteError::EmptySide);
    }
    if r.rows() != e_vertices.len() || r.cols() != f_vertices.len() {
        return Err(BipartiteError::RShape {
            rows: r.rows(),
            cols: r.cols(),
            expected_rows: e_vertices.len(),
            expected_cols: f_vertices.len(),
        });
    }
    if s.rows() != f_vertices.len() || s.cols() != e_vertices.len() {
        return Err(BipartiteError::SShape {
            rows: s.rows(),
            cols: s.cols(),
            expected_rows: f_vertices.len(),
            expected_cols: e_vertices.len(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for v in e_vertices.iter().chain(f_vertices) {
        if !seen.insert(v.clone()) {
            return Err(BipartiteError::IdCollision(v.clone()));
        }
    }

    let mut edges = Vec::new();
    let mut r_edge_ids = Vec::new();
    let mut s_edge_ids = Vec::new();
    for (i, v) in e_vertices.iter().enumerate() {
        for (j, w) in f_vertices.iter().enumerate() {
            for k in 0..r.get(i, j) {
                let id = format!("r_{v}_{w}_{k}");
                r_edge_ids.push(id.clone());
                edges.push(Edge::new(id, v.clone(), w.clone()));
            }
        }
    }
    for (j, w) in f_vertices.iter().enumerate() {
        for (i, v) in e_vertices.iter().enumerate() {
            for k in 0..s.get(j, i) {
                let id = format!("s_{w}_{v}_{k}");
                s_edge_ids.push(id.clone());
                edges.push(Edge::new(id, w.clone(), v.clone()));
            }
        }
    }

    let vertices: Vec<String> = e_vertices.iter().chain(f_vertices).cloned().collect();
    let graph = Graph::new(vertices, edges).map_err(|e| match e {
        crate::graph::GraphError::DuplicateEdge(id) => BipartiteError::EdgeIdCollision(id),
        crate::graph::GraphError::DuplicateVertex(id) => BipartiteError::IdCollision(id),
        other => unreachable!("construction is consistent: {other}"),
    })?;
    Ok(BipartiteInflation {
        graph,
        e_vertices: e_vertices.to_vec(),
        f_vertices: f_vertices.to_vec(),
        r_edge_ids,
        s_edge_ids,
    })
}

/// Recovers one side as the graph of length-two paths starting there. Edges
/// of the recovered graph are named `e0, e1, ...` (side E) or `f0, f1, ...`
/// (side F) in lexicographic path order; the returned bijection records which
/// path each edge abbreviates.
///
/// The vertex matrix of the recovered graph is `R*S` for side E and `S*R`
/// for side F.
pub fn recover_side(g: &BipartiteInflation, side: Side) -> (Graph, PathBijection) {
    let (vertices, start, prefix) = match side {
        Side::E => (g.e_vertices.clone(), g.e_vertex_set(), "e"),
        Side::F => (g.f_vertices.clone(), g.f_vertex_set(), "f"),
    };
    let paths = g.graph.paths_of_length(2, &start);
    let mut bijection = PathBijection::default();
    let mut edges = Vec::with_capacity(paths.len());
    for (k, path) in paths.iter().enumerate() {
        let first = g.graph.edge(&path[0]).expect("path edge exists");
        let second = g.graph.edge(&path[1]).expect("path edge exists");
        let id = format!("{prefix}{k}");
        edges.push(Edge::new(id.clone(), first.src.clone(), second.rng.clone()));
        bijection.insert(id, (path[0].clone(), path[1].clone()));
    }
    let graph = Graph::new(vertices, edges)
        .expect("length-two paths from one side start and end on that side");
    (graph, bijection)
}

/// Basis-level content of the tensor decomposition of the edge
/// correspondence: every edge of `e` pairs off with a composable
/// (R-edge, S-edge) path, respecting sources and ranges. The report lists
/// the bijection when it exists and the counting mismatch when it does not.
pub fn tensor_decomposition_check(e: &Graph, w: &EsseWitness) -> Report {
    let mut report = Report::new("tensor decomposition at basis level");
    let product = match w.r.multiply(&w.s) {
        Ok(p) => p,
        Err(err) => {
            report.fail("R*S defined", err.to_string());
            return report;
        }
    };
    let vm = e.vertex_matrix();
    if vm != product {
        report.fail(
            "vertex matrix equals R*S",
            format!("vertex matrix is {vm} but R*S is {product}"),
        );
    } else {
        report.pass("vertex matrix equals R*S");
    }

    // Synthesize F-side vertex ids that avoid the ids of e.
    let mut f_prefix = String::from("f");
    while e.vertices().iter().any(|v| v.starts_with(&f_prefix)) {
        f_prefix.push('_');
    }
    let f_vertices: Vec<String> = (0..w.r.cols()).map(|j| format!("{f_prefix}{j}")).collect();
    let inflation = match build_bipartite(e.vertices(), &f_vertices, &w.r, &w.s) {
        Ok(g) => g,
        Err(err) => {
            report.fail("inflation constructible", err.to_string());
            return report;
        }
    };
    let pairs = inflation
        .graph()
        .paths_of_length(2, &inflation.e_vertex_set());

    report.check(
        "edge count equals pair count",
        e.edge_count() == pairs.len(),
        format!("{} != {}", e.edge_count(), pairs.len()),
    );

    // Group both sides by (source, range) and pair them off in id order.
    let mut edges_by_cell: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let mut sorted_edges: Vec<&Edge> = e.edges().iter().collect();
    sorted_edges.sort_by(|a, b| a.id.cmp(&b.id));
    for edge in sorted_edges {
        edges_by_cell
            .entry((edge.src.clone(), edge.rng.clone()))
            .or_default()
            .push(edge.id.clone());
    }
    let mut pairs_by_cell: BTreeMap<(String, String), Vec<(String, String)>> = BTreeMap::new();
    for path in &pairs {
        let first = inflation.graph().edge(&path[0]).expect("edge exists");
        let second = inflation.graph().edge(&path[1]).expect("edge exists");
        pairs_by_cell
            .entry((first.src.clone(), second.rng.clone()))
            .or_default()
            .push((path[0].clone(), path[1].clone()));
    }

    let cells: std::collections::BTreeSet<(String, String)> = edges_by_cell
        .keys()
        .chain(pairs_by_cell.keys())
        .cloned()
        .collect();
    let mut matched = true;
    for cell in &cells {
        let edges = edges_by_cell.get(cell).map(Vec::as_slice).unwrap_or(&[]);
        let cell_pairs = pairs_by_cell.get(cell).map(Vec::as_slice).unwrap_or(&[]);
        if edges.len() != cell_pairs.len() {
            matched = false;
            report.fail(
                format!("cell ({}, {})", cell.0, cell.1),
                format!("{} edges vs {} pairs", edges.len(), cell_pairs.len()),
            );
        }
    }
    if matched && report.accepted() {
        for cell in &cells {
            let edges = &edges_by_cell[cell];
            let cell_pairs = &pairs_by_cell[cell];
            for (edge, pair) in edges.iter().zip(cell_pairs) {
                report.pass(format!("{edge} <-> ({}, {})", pair.0, pair.1));
            }
        }
    }
    report
}
