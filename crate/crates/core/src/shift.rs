//! Edge-shift combinatorics: allowed words, periodic word counts, and the
//! sliding-block code a factorization witness induces between two edge
//! shifts.
//!
//! Bi-infinite sequences are out of reach, so the conjugacy is verified on
//! finite windows: images of allowed words stay allowed, the code commutes
//! with the shift, and periodic word counts agree. Words are stored as edge
//! id sequences; vertex sequences would be ambiguous in a multigraph.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bipartite::{BipartiteInflation, PathBijection};
use crate::graph::Graph;
use crate::report::Report;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShiftError {
    #[error("unknown edge id {0:?}")]
    UnknownEdge(String),
    #[error("edges {first:?} and {second:?} do not compose")]
    NotComposable { first: String, second: String },
    #[error("word must have length at least {min}, got {got}")]
    WordTooShort { min: usize, got: usize },
    #[error("bijection mismatch: {0}")]
    BijectionMismatch(String),
}

/// A finite composable sequence of edge ids of a fixed graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word(Vec<String>);

impl Word {
    /// Validates existence and composability of the edges in `g`.
    pub fn new(g: &Graph, edge_ids: Vec<String>) -> Result<Self, ShiftError> {
        if edge_ids.is_empty() {
            return Err(ShiftError::WordTooShort { min: 1, got: 0 });
        }
        for pair in edge_ids.windows(2) {
            let first = g
                .edge(&pair[0])
                .ok_or_else(|| ShiftError::UnknownEdge(pair[0].clone()))?;
            let second = g
                .edge(&pair[1])
                .ok_or_else(|| ShiftError::UnknownEdge(pair[1].clone()))?;
            if first.rng != second.src {
                return Err(ShiftError::NotComposable {
                    first: pair[0].clone(),
                    second: pair[1].clone(),
                });
            }
        }
        if g.edge(&edge_ids[0]).is_none() {
            return Err(ShiftError::UnknownEdge(edge_ids[0].clone()));
        }
        Ok(Word(edge_ids))
    }

    pub fn edge_ids(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.join("."))
    }
}

/// All composable words of length `n`, in lexicographic order of their edge
/// id sequences. `n >= 1`.
pub fn allowed_words(g: &Graph, n: usize) -> Vec<Word> {
    g.paths_of_length(n, &g.all_vertices())
        .into_iter()
        .map(Word)
        .collect()
}

/// Number of composable words of length `k` whose last edge composes back to
/// the first: closed paths of length `k`. Counted by dynamic programming on
/// the edge structure, independently of any vertex-matrix arithmetic.
pub fn periodic_word_count(g: &Graph, k: usize) -> i64 {
    assert!(k >= 1, "period must be at least 1");
    let edges = g.edges();
    let vertex_of = |id: &str| g.vertex_position(id).expect("endpoint exists");
    let mut total: i64 = 0;
    for start in 0..edges.len() {
        // counts[f] = composable words of the current length starting with
        // `start` and ending with edge f.
        let mut counts = vec![0i64; edges.len()];
        counts[start] = 1;
        for _ in 1..k {
            let mut incoming = vec![0i64; g.vertex_count()];
            for (f, c) in counts.iter().enumerate() {
                if *c != 0 {
                    let v = vertex_of(&edges[f].rng);
                    incoming[v] = incoming[v].checked_add(*c).expect("count overflow");
                }
            }
            let mut next = vec![0i64; edges.len()];
            for (f, slot) in next.iter_mut().enumerate() {
                *slot = incoming[vertex_of(&edges[f].src)];
            }
            counts = next;
        }
        let back_to = vertex_of(&edges[start].src);
        for (f, c) in counts.iter().enumerate() {
            if vertex_of(&edges[f].rng) == back_to {
                total = total.checked_add(*c).expect("count overflow");
            }
        }
    }
    total
}

/// A sliding-block map between edge shifts with memory 0 and anticipation 1:
/// each output letter is determined by the current input letter and the next
/// one. That window is forced by the length-two path decomposition the rule
/// is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCode {
    source: Graph,
    target: Graph,
    rule: BTreeMap<(String, String), String>,
}

impl BlockCode {
    pub fn source(&self) -> &Graph {
        &self.source
    }

    pub fn target(&self) -> &Graph {
        &self.target
    }

    pub fn rule(&self) -> &BTreeMap<(String, String), String> {
        &self.rule
    }

    pub fn image_of_pair(&self, first: &str, second: &str) -> Option<&String> {
        self.rule.get(&(first.to_string(), second.to_string()))
    }

    /// Test hook: replaces the image of one pair. The result usually fails
    /// [`verify_conjugacy_window`], which is the point.
    pub fn with_rule_override(mut self, pair: (String, String), image: String) -> Self {
        self.rule.insert(pair, image);
        self
    }

    fn apply_raw(&self, edge_ids: &[String]) -> Result<Vec<String>, ShiftError> {
        if edge_ids.len() < 2 {
            return Err(ShiftError::WordTooShort {
                min: 2,
                got: edge_ids.len(),
            });
        }
        edge_ids
            .windows(2)
            .map(|pair| {
                self.rule
                    .get(&(pair[0].clone(), pair[1].clone()))
                    .cloned()
                    .ok_or_else(|| ShiftError::NotComposable {
                        first: pair[0].clone(),
                        second: pair[1].clone(),
                    })
            })
            .collect()
    }
}

/// Builds the block code induced by the two recovery bijections of an
/// inflation: a composable pair (x, y) with decompositions x = (rho_x,
/// sigma_x) and y = (rho_y, sigma_y) maps to the target edge abbreviating
/// the path (sigma_x, rho_y).
pub fn conjugacy_code(
    e: &Graph,
    f: &Graph,
    g: &BipartiteInflation,
    be: &PathBijection,
    bf: &PathBijection,
) -> Result<BlockCode, ShiftError> {
    for edge in e.edges() {
        let (rho, sigma) = be.path_of(&edge.id).ok_or_else(|| {
            ShiftError::BijectionMismatch(format!("edge {:?} of E has no path image", edge.id))
        })?;
        for id in [rho, sigma] {
            if g.graph().edge(id).is_none() {
                return Err(ShiftError::BijectionMismatch(format!(
                    "path edge {id:?} is not in the inflation"
                )));
            }
        }
    }
    let mut rule = BTreeMap::new();
    for x in e.edges() {
        for y in e.edges() {
            if x.rng != y.src {
                continue;
            }
            let (_, sigma_x) = be.path_of(&x.id).expect("checked above");
            let (rho_y, _) = be.path_of(&y.id).expect("checked above");
            let image = bf.edge_of(sigma_x, rho_y).ok_or_else(|| {
                ShiftError::BijectionMismatch(format!(
                    "no F edge abbreviates the path ({sigma_x}, {rho_y})"
                ))
            })?;
            if f.edge(image).is_none() {
                return Err(ShiftError::BijectionMismatch(format!(
                    "image edge {image:?} is not in F"
                )));
            }
            rule.insert((x.id.clone(), y.id.clone()), image.clone());
        }
    }
    Ok(BlockCode {
        source: e.clone(),
        target: f.clone(),
        rule,
    })
}

/// Applies the code to a composable source word of length >= 2, producing a
/// target word one letter shorter.
pub fn apply_code(code: &BlockCode, w: &Word) -> Result<Word, ShiftError> {
    let image = code.apply_raw(w.edge_ids())?;
    Word::new(&code.target, image)
}

/// Finite-window verification of the conjugacy claim, `l >= 3`:
/// (i) images of all allowed length-`l` source words are allowed in the
/// target; (ii) coding commutes with dropping the first letter; (iii)
/// periodic word counts agree for all periods below the window.
pub fn verify_conjugacy_window(code: &BlockCode, l: usize) -> Report {
    assert!(l >= 3, "window must be at least 3");
    let mut report = Report::new("sliding-block conjugacy window");
    report.note(format!(
        "window length {l}; finite-window evidence, not a proof on bi-infinite sequences"
    ));

    let words = allowed_words(&code.source, l);
    let mut image_failure: Option<String> = None;
    let mut shift_failure: Option<String> = None;
    for word in &words {
        match code.apply_raw(word.edge_ids()) {
            Err(err) => {
                image_failure.get_or_insert(format!("word {word}: {err}"));
            }
            Ok(image) => {
                if let Err(err) = Word::new(&code.target, image.clone()) {
                    image_failure.get_or_insert(format!("word {word}: image not allowed: {err}"));
                }
                match code.apply_raw(&word.edge_ids()[1..]) {
                    Err(err) => {
                        shift_failure.get_or_insert(format!("word {word}: {err}"));
                    }
                    Ok(shifted_image) => {
                        if shifted_image != image[1..] {
                            shift_failure.get_or_insert(format!(
                                "word {word}: code(shift(w)) != shift(code(w))"
                            ));
                        }
                    }
                }
            }
        }
    }
    report.check(
        format!("images of all {} length-{l} words allowed", words.len()),
        image_failure.is_none(),
        image_failure.unwrap_or_default(),
    );
    report.check(
        "shift commutation on all windows",
        shift_failure.is_none(),
        shift_failure.unwrap_or_default(),
    );
    for k in 1..l {
        let source_count = periodic_word_count(&code.source, k);
        let target_count = periodic_word_count(&code.target, k);
        report.check(
            format!("periodic words of length {k}: {source_count} = {target_count}"),
            source_count == target_count,
            format!("{source_count} != {target_count}"),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{build_bipartite, recover_side, Side};
    use crate::graph::Edge;
    use crate::matrix::Matrix;
    use crate::sse::{enumerate_factorizations, verify_esse, EsseWitness};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::ops::ControlFlow;

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

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

    /// The example pipeline: build the inflation, recover both sides, build
    /// the code between the recovered graphs.
    fn example_code() -> BlockCode {
        let g = build_bipartite(
            &["v".to_string(), "w".to_string()],
            &["x".to_string(), "y".to_string(), "z".to_string()],
            &mat(&[&[1, 1, 0], &[0, 0, 1]]),
            &mat(&[&[1, 0], &[0, 1], &[0, 1]]),
        )
        .unwrap();
        let (e, be) = recover_side(&g, Side::E);
        let (f, bf) = recover_side(&g, Side::F);
        conjugacy_code(&e, &f, &g, &be, &bf).unwrap()
    }

    #[test]
    fn allowed_words_examples() {
        let e = example_e();
        let words: Vec<String> = allowed_words(&e, 2).iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["a.a", "a.b", "b.c", "c.c"]);

        let singles = allowed_words(&e, 1);
        assert_eq!(singles.len(), 3);

        let f = example_f();
        let words: Vec<String> = allowed_words(&f, 2).iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["d.d", "d.e", "e.f", "f.g", "g.g"]);
    }

    #[test]
    fn periodic_word_count_examples() {
        let e = example_e();
        assert_eq!(periodic_word_count(&e, 1), 2);
        assert_eq!(periodic_word_count(&e, 4), 2);
        let two_loops = crate::graph::graph_from_matrix(&mat(&[&[2]]), "").unwrap();
        assert_eq!(periodic_word_count(&two_loops, 3), 8);
    }

    #[test]
    fn periodic_count_matches_trace_exhaustive_small() {
        // Every vertex matrix on <= 2 vertices with entries <= 2.
        for n in 1..=2usize {
            let cells = n * n;
            for code in 0..3i64.pow(cells as u32) {
                let mut entries = Vec::with_capacity(cells);
                let mut rest = code;
                for _ in 0..cells {
                    entries.push(rest % 3);
                    rest /= 3;
                }
                let a = Matrix::new(n, n, entries).unwrap();
                let g = crate::graph::graph_from_matrix(&a, "").unwrap();
                for k in 1..=5 {
                    assert_eq!(
                        periodic_word_count(&g, k),
                        a.trace_power(k).unwrap(),
                        "a={a} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn periodic_count_matches_trace_random() {
        let mut rng = StdRng::seed_from_u64(40);
        for _ in 0..200 {
            let n = rng.random_range(1..=5);
            let entries = (0..n * n).map(|_| rng.random_range(0..=2)).collect();
            let a = Matrix::new(n, n, entries).unwrap();
            let g = crate::graph::graph_from_matrix(&a, "").unwrap();
            for k in 1..=5 {
                assert_eq!(periodic_word_count(&g, k), a.trace_power(k).unwrap());
            }
        }
    }

    #[test]
    fn word_count_matches_matrix_power_sum() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let n = rng.random_range(1..=4);
            let entries = (0..n * n).map(|_| rng.random_range(0..=2)).collect();
            let a = Matrix::new(n, n, entries).unwrap();
            let g = crate::graph::graph_from_matrix(&a, "").unwrap();
            for len in 1..=4 {
                let mut power = a.clone();
                for _ in 1..len {
                    power = power.multiply(&a).unwrap();
                }
                assert_eq!(allowed_words(&g, len).len() as i64, power.entry_sum());
            }
        }
    }

    #[test]
    fn example_code_rule_table() {
        let code = example_code();
        // Recovered ids: e0 = a, e1 = b, e2 = c; f0 = d, f1 = e, f2 = f, f3 = g.
        assert_eq!(code.image_of_pair("e0", "e0"), Some(&"f0".to_string()));
        assert_eq!(code.image_of_pair("e0", "e1"), Some(&"f1".to_string()));
        assert_eq!(code.image_of_pair("e1", "e2"), Some(&"f2".to_string()));
        assert_eq!(code.image_of_pair("e2", "e2"), Some(&"f3".to_string()));
        assert_eq!(code.rule().len(), 4);
    }

    #[test]
    fn apply_code_examples() {
        let code = example_code();
        let aabcc = Word::new(
            code.source(),
            vec!["e0".into(), "e0".into(), "e1".into(), "e2".into(), "e2".into()],
        )
        .unwrap();
        let image = apply_code(&code, &aabcc).unwrap();
        assert_eq!(image.edge_ids(), ["f0", "f1", "f2", "f3"]);

        let aa = Word::new(code.source(), vec!["e0".into(), "e0".into()]).unwrap();
        assert_eq!(apply_code(&code, &aa).unwrap().edge_ids(), ["f0"]);

        let single = Word::new(code.source(), vec!["e0".into()]).unwrap();
        assert!(matches!(
            apply_code(&code, &single),
            Err(ShiftError::WordTooShort { min: 2, got: 1 })
        ));
    }

    #[test]
    fn window_verification_accepts_example() {
        let code = example_code();
        for l in [3, 8] {
            let report = verify_conjugacy_window(&code, l);
            assert!(report.accepted(), "l={l}: {report}");
        }
    }

    #[test]
    fn window_verification_rejects_corrupted_rule() {
        let code = example_code()
            .with_rule_override(("e1".into(), "e2".into()), "f3".into())
            .with_rule_override(("e2".into(), "e2".into()), "f2".into());
        let report = verify_conjugacy_window(&code, 3);
        assert!(!report.accepted());
        assert!(
            report
                .failures()
                .any(|f| f.label.contains("words allowed") && f.detail.contains("image not allowed")),
            "{report}"
        );
    }

    #[test]
    fn accepted_witnesses_induce_window_conjugacies() {
        // Random regular factorization pairs; every accepted witness must
        // induce a code that passes the window check at l = 6.
        let mut rng = StdRng::seed_from_u64(42);
        let mut done = 0;
        while done < 50 {
            let n = rng.random_range(1..=3);
            let p = rng.random_range(1..=3);
            let r = loop {
                let entries: Vec<i64> = (0..n * p).map(|_| rng.random_range(0..=2)).collect();
                let m = Matrix::new(n, p, entries).unwrap();
                if m.is_regular() {
                    break m;
                }
            };
            let s = loop {
                let entries: Vec<i64> = (0..p * n).map(|_| rng.random_range(0..=2)).collect();
                let m = Matrix::new(p, n, entries).unwrap();
                if m.is_regular() {
                    break m;
                }
            };
            let a = r.multiply(&s).unwrap();
            let b = s.multiply(&r).unwrap();
            if a.entry_sum() > 8 || b.entry_sum() > 8 {
                continue; // keep the window enumeration small
            }
            let w = EsseWitness { r, s };
            assert!(verify_esse(&a, &b, &w).accepted());
            let e_vertices: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
            let f_vertices: Vec<String> = (0..p).map(|j| format!("q{j}")).collect();
            let g = build_bipartite(&e_vertices, &f_vertices, &w.r, &w.s).unwrap();
            let (e, be) = recover_side(&g, Side::E);
            let (f, bf) = recover_side(&g, Side::F);
            let code = conjugacy_code(&e, &f, &g, &be, &bf).unwrap();
            let report = verify_conjugacy_window(&code, 6);
            assert!(report.accepted(), "{report}");
            done += 1;
        }
    }

    #[test]
    fn enumerated_witnesses_match_example_count() {
        // Smoke check that the factorization enumerator and the window
        // machinery agree on the example: every enumerated witness for
        // (A_E, A_F) induces a working code.
        let a = mat(&[&[1, 1], &[0, 1]]);
        let b = mat(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]]);
        let mut count = 0;
        enumerate_factorizations(&a, 3, 1, Some(&b), &mut |r, s| {
            let w = EsseWitness { r, s };
            assert!(verify_esse(&a, &b, &w).accepted());
            count += 1;
            ControlFlow::Continue(())
        });
        assert!(count >= 1);
    }
}
