//! Finite directed multigraphs with identified edges.
//!
//! Edges carry stable string ids so that downstream machinery (path
//! bijections, block codes, Cuntz-Krieger generators) can name individual
//! parallel edges. Vertex order is significant: it fixes the row and column
//! order of the vertex matrix.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least one vertex")]
    NoVertices,
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("edge {edge:?} references unknown vertex {vertex:?}")]
    UnknownEndpoint { edge: String, vertex: String },
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A directed edge with a stable id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: String,
    pub rng: String,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        src: impl Into<String>,
        rng: impl Into<String>,
    ) -> Self {
        Edge {
            id: id.into(),
            src: src.into(),
            rng: rng.into(),
        }
    }
}

/// Finite directed multigraph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    /// Out-edge indices per vertex, sorted by edge id.
    out_edges: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::NoVertices);
        }
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateEdge(e.id.clone()));
            }
            for endpoint in [&e.src, &e.rng] {
                if !vertex_index.contains_key(endpoint) {
                    return Err(GraphError::UnknownEndpoint {
                        edge: e.id.clone(),
                        vertex: endpoint.clone(),
                    });
                }
            }
        }
        let mut out_edges = vec![Vec::new(); vertices.len()];
        let mut by_id: Vec<usize> = (0..edges.len()).collect();
        by_id.sort_by(|&a, &b| edges[a].id.cmp(&edges[b].id));
        for idx in by_id {
            out_edges[vertex_index[&edges[idx].src]].push(idx);
        }
        Ok(Graph {
            vertices,
            edges,
            vertex_index,
            edge_index,
            out_edges,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, id: &str) -> bool {
        self.vertex_index.contains_key(id)
    }

    pub fn vertex_position(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    /// Out-edges of `v`, sorted by edge id.
    pub fn out_edges(&self, v: &str) -> impl Iterator<Item = &Edge> {
        let indices = self
            .vertex_index
            .get(v)
            .map(|&i| self.out_edges[i].as_slice())
            .unwrap_or(&[]);
        indices.iter().map(|&i| &self.edges[i])
    }

    pub fn out_degree(&self, v: &str) -> usize {
        self.vertex_index
            .get(v)
            .map(|&i| self.out_edges[i].len())
            .unwrap_or(0)
    }

    /// The square matrix, indexed by vertex order, whose (v, w) entry counts
    /// edges v -> w.
    pub fn vertex_matrix(&self) -> Matrix {
        let n = self.vertices.len();
        let mut entries = vec![0i64; n * n];
        for e in &self.edges {
            let i = self.vertex_index[&e.src];
            let j = self.vertex_index[&e.rng];
            entries[i * n + j] += 1;
        }
        Matrix::new(n, n, entries).expect("vertex count is positive")
    }

    /// True iff every vertex emits at least one edge; equivalent to
    /// regularity of the vertex matrix.
    pub fn is_regular_graph(&self) -> bool {
        self.out_edges.iter().all(|es| !es.is_empty())
    }

    /// Checked vertex-set constructor: every id must name a vertex of this
    /// graph.
    pub fn vertex_set<I>(&self, ids: I) -> Result<VertexSet, GraphError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let mut set = BTreeSet::new();
        for id in ids {
            let id = id.into();
            if !self.has_vertex(&id) {
                return Err(GraphError::UnknownVertex(id));
            }
            set.insert(id);
        }
        Ok(VertexSet(set))
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet(self.vertices.iter().cloned().collect())
    }

    /// Smallest superset H of `start` such that `s(e) in H` implies
    /// `r(e) in H`: the forward reachability closure.
    pub fn hereditary_closure(&self, start: &VertexSet) -> VertexSet {
        let mut closed: BTreeSet<String> = start.0.clone();
        let mut frontier: Vec<String> = start.0.iter().cloned().collect();
        while let Some(v) = frontier.pop() {
            for e in self.out_edges(&v) {
                if closed.insert(e.rng.clone()) {
                    frontier.push(e.rng.clone());
                }
            }
        }
        VertexSet(closed)
    }

    /// All composable edge sequences of length `n` whose first edge starts in
    /// `from`, in lexicographic order of the edge-id sequences. `n >= 1`.
    pub fn paths_of_length(&self, n: usize, from: &VertexSet) -> Vec<Vec<String>> {
        assert!(n >= 1, "path length must be at least 1");
        let mut result = Vec::new();
        let mut current: Vec<usize> = Vec::with_capacity(n);
        // Out-edge lists are id-sorted and `from` iterates in id order, but
        // lexicographic order of whole sequences needs first edges globally
        // sorted by id, not grouped by source vertex.
        let mut first_edges: Vec<usize> = from
            .iter()
            .flat_map(|v| {
                let vi = self.vertex_index[v];
                self.out_edges[vi].iter().copied()
            })
            .collect();
        first_edges.sort_by(|&a, &b| self.edges[a].id.cmp(&self.edges[b].id));
        for idx in first_edges {
            current.push(idx);
            self.extend_paths(n, &mut current, &mut result);
            current.pop();
        }
        result
    }

    fn extend_paths(&self, n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<String>>) {
        if current.len() == n {
            out.push(
                current
                    .iter()
                    .map(|&i| self.edges[i].id.clone())
                    .collect(),
            );
            return;
        }
        let last = &self.edges[*current.last().expect("non-empty prefix")];
        let at = self.vertex_index[&last.rng];
        for &next in &self.out_edges[at] {
            current.push(next);
            self.extend_paths(n, current, out);
            current.pop();
        }
    }
}

/// Deterministic inverse of [`Graph::vertex_matrix`]: vertices
/// `{prefix}v0..{prefix}v{n-1}`, with `a(i, j)` edges i -> j named
/// `{prefix}e{i}_{j}_{k}`.
pub fn graph_from_matrix(a: &Matrix, prefix: &str) -> Result<Graph, GraphError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        }
        .into());
    }
    let n = a.rows();
    let vertices: Vec<String> = (0..n).map(|i| format!("{prefix}v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..a.get(i, j) {
                edges.push(Edge::new(
                    format!("{prefix}e{i}_{j}_{k}"),
                    vertices[i].clone(),
                    vertices[j].clone(),
                ));
            }
        }
    }
    Graph::new(vertices, edges)
}

/// An ordered set of vertex ids, used for path starts, hereditary closures,
/// and the two halves of a bipartite inflation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VertexSet(BTreeSet<String>);

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet(BTreeSet::new())
    }

    /// Unchecked constructor; prefer [`Graph::vertex_set`] when a graph is at
    /// hand so membership is validated.
    pub fn from_ids<I>(ids: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        VertexSet(ids.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.union(&other.0).cloned().collect())
    }
}

impl<S: Into<String>> FromIterator<S> for VertexSet {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        VertexSet::from_ids(iter)
    }
}

/// Used by tests and the hereditary-closure fixpoint oracle.
impl From<VertexSet> for BTreeSet<String> {
    fn from(set: VertexSet) -> Self {
        set.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn example_e() -> Graph {
        Graph::new(
            vec!["v".into(), "w".into()],
            vec![
                Edge::new("a", "v", "v"),
                Edge::new("b", "v", "w"),
                Edge::new("c", "w", "w"),
            ],
        )
        .unwrap()
    }

    fn example_f() -> Graph {
        Graph::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                Edge::new("d", "x", "x"),
                Edge::new("e", "x", "y"),
                Edge::new("f", "y", "z"),
                Edge::new("g", "z", "z"),
            ],
        )
        .unwrap()
    }

    /// The bipartite graph linking the two example graphs, with the
    /// conventional Greek edge names spelled out.
    fn example_inflation_graph() -> Graph {
        Graph::new(
            vec!["v".into(), "w".into(), "x".into(), "y".into(), "z".into()],
            vec![
                Edge::new("beta", "v", "x"),
                Edge::new("gamma", "v", "y"),
                Edge::new("zeta", "w", "z"),
                Edge::new("alpha", "x", "v"),
                Edge::new("delta", "y", "w"),
                Edge::new("epsilon", "z", "w"),
            ],
        )
        .unwrap()
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Brute-force fixpoint oracle for hereditary closures.
    fn closure_fixpoint_oracle(g: &Graph, start: &VertexSet) -> BTreeSet<String> {
        let mut h: BTreeSet<String> = start.iter().cloned().collect();
        loop {
            let mut grew = false;
            for e in g.edges() {
                if h.contains(&e.src) && h.insert(e.rng.clone()) {
                    grew = true;
                }
            }
            if !grew {
                return h;
            }
        }
    }

    #[test]
    fn vertex_matrix_examples() {
        assert_eq!(example_e().vertex_matrix(), mat(&[&[1, 1], &[0, 1]]));
        assert_eq!(
            example_f().vertex_matrix(),
            mat(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]])
        );
        let edgeless = Graph::new(vec!["p".into(), "q".into()], vec![]).unwrap();
        assert_eq!(edgeless.vertex_matrix(), mat(&[&[0, 0], &[0, 0]]));
    }

    #[test]
    fn graph_from_matrix_examples() {
        let two_loops = graph_from_matrix(&mat(&[&[2]]), "").unwrap();
        assert_eq!(two_loops.vertex_count(), 1);
        assert_eq!(two_loops.edge_count(), 2);
        assert!(two_loops.edges().iter().all(|e| e.src == "v0" && e.rng == "v0"));

        let e_like = graph_from_matrix(&mat(&[&[1, 1], &[0, 1]]), "").unwrap();
        assert_eq!(e_like.edge_count(), 3);
        assert_eq!(e_like.vertex_matrix(), mat(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn graph_from_matrix_round_trip_random() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let entries = (0..n * n).map(|_| rng.random_range(0..=3)).collect();
            let a = Matrix::new(n, n, entries).unwrap();
            let g = graph_from_matrix(&a, "t").unwrap();
            assert_eq!(g.vertex_matrix(), a);
        }
    }

    #[test]
    fn regularity_examples() {
        assert!(example_e().is_regular_graph());
        assert!(example_f().is_regular_graph());
        let sink = Graph::new(
            vec!["u".into(), "s".into()],
            vec![Edge::new("e0", "u", "s")],
        )
        .unwrap();
        assert!(!sink.is_regular_graph());
        let loop_graph = Graph::new(vec!["u".into()], vec![Edge::new("l", "u", "u")]).unwrap();
        assert!(loop_graph.is_regular_graph());
    }

    #[test]
    fn hereditary_closure_examples() {
        let g = example_inflation_graph();
        let from_e = g.vertex_set(["v", "w"]).unwrap();
        let closure = g.hereditary_closure(&from_e);
        assert_eq!(closure, g.all_vertices());

        assert_eq!(g.hereditary_closure(&VertexSet::empty()), VertexSet::empty());

        let from_x = g.vertex_set(["x"]).unwrap();
        let closure = g.hereditary_closure(&from_x);
        assert_eq!(closure, VertexSet::from_ids(["x", "v", "y", "w", "z"]));
        assert_eq!(
            BTreeSet::from(closure),
            closure_fixpoint_oracle(&g, &from_x)
        );
    }

    #[test]
    fn hereditary_closure_properties_random() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.random_range(1..=5);
            let entries = (0..n * n).map(|_| rng.random_range(0..=1)).collect();
            let a = Matrix::new(n, n, entries).unwrap();
            let g = graph_from_matrix(&a, "").unwrap();
            let k = rng.random_range(0..=n);
            let start: VertexSet = g.vertices().iter().take(k).cloned().collect();
            let closure = g.hereditary_closure(&start);
            assert!(start.is_subset(&closure), "contains start");
            assert_eq!(g.hereditary_closure(&closure), closure, "idempotent");
            let extra = g.vertices()[rng.random_range(0..n)].clone();
            let bigger = start.union(&VertexSet::from_ids([extra]));
            assert!(
                closure.is_subset(&g.hereditary_closure(&bigger)),
                "monotone"
            );
            assert_eq!(
                BTreeSet::from(closure),
                closure_fixpoint_oracle(&g, &start),
                "matches fixpoint oracle"
            );
        }
    }

    #[test]
    fn paths_of_length_examples() {
        let g = example_inflation_graph();
        let from_e = g.vertex_set(["v", "w"]).unwrap();
        let paths = g.paths_of_length(2, &from_e);
        assert_eq!(
            paths,
            vec![
                vec!["beta".to_string(), "alpha".to_string()],
                vec!["gamma".to_string(), "delta".to_string()],
                vec!["zeta".to_string(), "epsilon".to_string()],
            ]
        );

        let from_f = g.vertex_set(["x", "y", "z"]).unwrap();
        assert_eq!(g.paths_of_length(2, &from_f).len(), 4);

        let all = g.all_vertices();
        let singles = g.paths_of_length(1, &all);
        assert_eq!(singles.len(), g.edge_count());
        let mut ids: Vec<String> = g.edges().iter().map(|e| e.id.clone()).collect();
        ids.sort();
        assert_eq!(singles.into_iter().map(|p| p[0].clone()).collect::<Vec<_>>(), ids);
    }

    #[test]
    fn path_count_matches_matrix_power() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..40 {
            let n = rng.random_range(1..=5);
            let entries = (0..n * n).map(|_| rng.random_range(0..=2)).collect();
            let a = Matrix::new(n, n, entries).unwrap();
            let g = graph_from_matrix(&a, "").unwrap();
            for len in 1..=5 {
                let count = g.paths_of_length(len, &g.all_vertices()).len() as i64;
                let mut power = a.clone();
                for _ in 1..len {
                    power = power.multiply(&a).unwrap();
                }
                assert_eq!(count, power.entry_sum(), "n={n} len={len}");
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_graphs() {
        assert!(matches!(
            Graph::new(vec![], vec![]),
            Err(GraphError::NoVertices)
        ));
        assert!(matches!(
            Graph::new(vec!["v".into(), "v".into()], vec![]),
            Err(GraphError::DuplicateVertex(_))
        ));
        assert!(matches!(
            Graph::new(
                vec!["v".into()],
                vec![Edge::new("a", "v", "v"), Edge::new("a", "v", "v")]
            ),
            Err(GraphError::DuplicateEdge(_))
        ));
        assert!(matches!(
            Graph::new(vec!["v".into()], vec![Edge::new("a", "v", "u")]),
            Err(GraphError::UnknownEndpoint { .. })
        ));
        assert!(matches!(
            example_e().vertex_set(["v", "nope"]),
            Err(GraphError::UnknownVertex(_))
        ));
    }
}
