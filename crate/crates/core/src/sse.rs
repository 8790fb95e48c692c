//! Elementary strong shift equivalence witnesses, chains between regular
//! square non-negative integer matrices, and bounded search for both.
//!
//! Strong shift equivalence has no known decision procedure, so the searches
//! are resource-bounded and return a three-valued outcome: a witness, a trace
//! refutation, or unknown-within-bounds. Not-found is never reported as a
//! disequivalence proof.

use std::collections::{HashSet, VecDeque};
use std::ops::ControlFlow;

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::report::Report;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SseError {
    #[error("{name} must be square, got {rows}x{cols}")]
    NotSquare {
        name: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{name} must be regular (every row needs a positive entry)")]
    NotRegular { name: &'static str },
    #[error("invalid search bounds: {0}")]
    InvalidBounds(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A factorization pair: `A = r*s` and `B = s*r` witnesses elementary strong
/// shift equivalence of A and B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EsseWitness {
    pub r: Matrix,
    pub s: Matrix,
}

impl EsseWitness {
    /// The witness read in the opposite direction (B = s*r, A = r*s).
    pub fn swapped(&self) -> EsseWitness {
        EsseWitness {
            r: self.s.clone(),
            s: self.r.clone(),
        }
    }
}

/// An alternating chain C_1, ..., C_n with a witness linking each
/// consecutive pair. A chain of one matrix and no witnesses is valid
/// (reflexivity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SseChain {
    pub matrices: Vec<Matrix>,
    pub witnesses: Vec<EsseWitness>,
}

/// Resource limits for the bounded searches. All fields must be positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    /// Largest inner dimension m tried for factorizations C = R*S with
    /// R of shape n x m.
    pub max_inner_dim: usize,
    /// Largest entry allowed in R and S (chain matrices themselves are not
    /// entry-bounded).
    pub max_entry: i64,
    /// Largest number of matrices in a chain.
    pub max_chain_length: usize,
    /// Largest dimension of an intermediate chain matrix.
    pub max_intermediate_dim: usize,
}

impl SearchBounds {
    /// Defaults sized to the inputs: inner dimension up to dim A + dim B,
    /// entries up to the largest input entry, chains of up to 6 matrices
    /// through intermediates of dimension up to 8.
    pub fn defaults_for(a: &Matrix, b: &Matrix) -> SearchBounds {
        SearchBounds {
            max_inner_dim: a.rows() + b.rows(),
            max_entry: a.max_entry().max(b.max_entry()).max(1),
            max_chain_length: 6,
            max_intermediate_dim: 8,
        }
    }

    fn validate(&self) -> Result<(), SseError> {
        if self.max_inner_dim == 0
            || self.max_entry <= 0
            || self.max_chain_length == 0
            || self.max_intermediate_dim == 0
        {
            return Err(SseError::InvalidBounds(
                "all bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Evidence that two matrices cannot be strong shift equivalent: a periodic
/// point count (trace of a power) that differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRefutation {
    pub k: usize,
    pub trace_a: i64,
    pub trace_b: i64,
}

/// Outcome of a bounded search. `Unknown` means the bounded region was
/// exhausted without a witness; it proves nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    RefutedByTrace(TraceRefutation),
    Unknown,
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

fn require_square_regular(m: &Matrix, name: &'static str) -> Result<(), SseError> {
    if !m.is_square() {
        return Err(SseError::NotSquare {
            name,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_regular() {
        return Err(SseError::NotRegular { name });
    }
    Ok(())
}

/// Checks `a = w.r * w.s`, `b = w.s * w.r`, and regularity of all four
/// matrices. Every failed condition becomes a report item; nothing throws.
pub fn verify_esse(a: &Matrix, b: &Matrix, w: &EsseWitness) -> Report {
    let mut report = Report::new("elementary strong shift equivalence");
    report.check(
        "A square",
        a.is_square(),
        format!("A is {}x{}", a.rows(), a.cols()),
    );
    report.check(
        "B square",
        b.is_square(),
        format!("B is {}x{}", b.rows(), b.cols()),
    );
    report.check("A regular", a.is_regular(), "A has a zero row");
    report.check("B regular", b.is_regular(), "B has a zero row");
    report.check("R regular", w.r.is_regular(), "R has a zero row");
    report.check("S regular", w.s.is_regular(), "S has a zero row");
    check_product(&mut report, "A = R*S", a, &w.r, &w.s);
    check_product(&mut report, "B = S*R", b, &w.s, &w.r);
    report
}

fn check_product(report: &mut Report, label: &str, expected: &Matrix, x: &Matrix, y: &Matrix) {
    match x.multiply(y) {
        Err(e) => report.fail(label, format!("product undefined: {e}")),
        Ok(product) => {
            if product == *expected {
                report.pass(label);
            } else if product.rows() != expected.rows() || product.cols() != expected.cols() {
                report.fail(
                    label,
                    format!(
                        "product is {}x{}, expected {}x{}",
                        product.rows(),
                        product.cols(),
                        expected.rows(),
                        expected.cols()
                    ),
                );
            } else {
                let (i, j) = first_difference(&product, expected);
                report.fail(
                    label,
                    format!(
                        "entry ({i},{j}): product has {}, expected {}",
                        product.get(i, j),
                        expected.get(i, j)
                    ),
                );
            }
        }
    }
}

fn first_difference(x: &Matrix, y: &Matrix) -> (usize, usize) {
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            if x.get(i, j) != y.get(i, j) {
                return (i, j);
            }
        }
    }
    unreachable!("matrices compared equal")
}

/// Checks every link of the chain with [`verify_esse`] and regularity of
/// every matrix; failures name the offending link.
pub fn verify_chain(chain: &SseChain) -> Report {
    let mut report = Report::new("strong shift equivalence chain");
    if chain.matrices.is_empty() {
        report.fail("chain non-empty", "chain has no matrices");
        return report;
    }
    report.check(
        "witness count",
        chain.witnesses.len() + 1 == chain.matrices.len(),
        format!(
            "{} matrices need {} witnesses, got {}",
            chain.matrices.len(),
            chain.matrices.len() - 1,
            chain.witnesses.len()
        ),
    );
    for (i, c) in chain.matrices.iter().enumerate() {
        report.check(
            format!("C{} square and regular", i + 1),
            c.is_square() && c.is_regular(),
            format!("C{} is {}x{}, regular={}", i + 1, c.rows(), c.cols(), c.is_regular()),
        );
    }
    for (i, w) in chain.witnesses.iter().enumerate() {
        if i + 1 >= chain.matrices.len() {
            break;
        }
        let link = verify_esse(&chain.matrices[i], &chain.matrices[i + 1], w);
        let summary = link
            .failures()
            .map(|f| f.label.clone())
            .collect::<Vec<_>>()
            .join("; ");
        report.check(
            format!("link {}: C{} ~ C{}", i + 1, i + 1, i + 2),
            link.accepted(),
            summary,
        );
    }
    report
}

/// Looks for k <= max(dim A, dim B) with tr(A^k) != tr(B^k). Traces up to the
/// dimension determine the nonzero spectrum, so further powers add nothing.
fn trace_refutation(a: &Matrix, b: &Matrix) -> Result<Option<TraceRefutation>, SseError> {
    for k in 1..=a.rows().max(b.rows()) {
        let trace_a = a.trace_power(k)?;
        let trace_b = b.trace_power(k)?;
        if trace_a != trace_b {
            return Ok(Some(TraceRefutation { k, trace_a, trace_b }));
        }
    }
    Ok(None)
}

/// Searches for a witness of elementary strong shift equivalence within
/// `bounds`. Returns the first witness in lexicographic order of
/// (inner dimension, flattened R, flattened S).
pub fn search_esse(
    a: &Matrix,
    b: &Matrix,
    bounds: &SearchBounds,
) -> Result<SearchOutcome<EsseWitness>, SseError> {
    bounds.validate()?;
    require_square_regular(a, "A")?;
    require_square_regular(b, "B")?;
    if let Some(refutation) = trace_refutation(a, b)? {
        return Ok(SearchOutcome::RefutedByTrace(refutation));
    }
    for m in 1..=bounds.max_inner_dim {
        // B = S*R has shape m x m, so only m = dim B can carry a witness.
        if m != b.rows() {
            continue;
        }
        let mut found = None;
        let _ = enumerate_factorizations(a, m, bounds.max_entry, Some(b), &mut |r, s| {
            found = Some(EsseWitness { r, s });
            ControlFlow::Break(())
        });
        if let Some(witness) = found {
            return Ok(SearchOutcome::Found(witness));
        }
    }
    Ok(SearchOutcome::Unknown)
}

/// Breadth-first search over elementary moves, deduplicated by canonical
/// form, for a chain from `a` to `b` within `bounds`.
pub fn search_chain(
    a: &Matrix,
    b: &Matrix,
    bounds: &SearchBounds,
) -> Result<SearchOutcome<SseChain>, SseError> {
    bounds.validate()?;
    require_square_regular(a, "A")?;
    require_square_regular(b, "B")?;
    if a == b {
        return Ok(SearchOutcome::Found(SseChain {
            matrices: vec![a.clone()],
            witnesses: vec![],
        }));
    }
    if let Some(refutation) = trace_refutation(a, b)? {
        return Ok(SearchOutcome::RefutedByTrace(refutation));
    }
    if bounds.max_chain_length < 2 {
        return Ok(SearchOutcome::Unknown);
    }

    struct Node {
        matrix: Matrix,
        parent: usize,
        witness: Option<EsseWitness>,
    }

    let mut nodes = vec![Node {
        matrix: a.clone(),
        parent: usize::MAX,
        witness: None,
    }];
    let mut visited: HashSet<Matrix> = HashSet::new();
    visited.insert(a.canonical_form_with_cap(bounds.max_intermediate_dim.max(a.rows()))?);
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    queue.push_back((0, 1));

    let inner_cap = bounds.max_inner_dim.min(bounds.max_intermediate_dim);

    while let Some((idx, len)) = queue.pop_front() {
        if len + 1 > bounds.max_chain_length {
            // FIFO order is by depth, so nothing later can extend either.
            break;
        }
        let current = nodes[idx].matrix.clone();
        let mut goal: Option<EsseWitness> = None;
        let mut fresh: Vec<(Matrix, EsseWitness)> = Vec::new();
        for m in 1..=inner_cap {
            let _ = enumerate_factorizations(&current, m, bounds.max_entry, None, &mut |r, s| {
                let next = s.multiply(&r).expect("shapes are composable");
                if next == *b {
                    goal = Some(EsseWitness { r, s });
                    return ControlFlow::Break(());
                }
                if next.is_regular() {
                    let canon = next
                        .canonical_form_with_cap(bounds.max_intermediate_dim)
                        .expect("m is capped by max_intermediate_dim");
                    if visited.insert(canon) {
                        fresh.push((next, EsseWitness { r, s }));
                    }
                }
                ControlFlow::Continue(())
            });
            if goal.is_some() {
                break;
            }
        }
        if let Some(witness) = goal {
            let mut matrices = vec![b.clone()];
            let mut witnesses = vec![witness];
            let mut at = idx;
            while at != usize::MAX {
                matrices.push(nodes[at].matrix.clone());
                if let Some(w) = nodes[at].witness.clone() {
                    witnesses.push(w);
                }
                at = nodes[at].parent;
            }
            matrices.reverse();
            witnesses.reverse();
            return Ok(SearchOutcome::Found(SseChain {
                matrices,
                witnesses,
            }));
        }
        for (matrix, witness) in fresh {
            nodes.push(Node {
                matrix,
                parent: idx,
                witness: Some(witness),
            });
            queue.push_back((nodes.len() - 1, len + 1));
        }
    }
    Ok(SearchOutcome::Unknown)
}

/// Enumerates factorizations `c = R*S` with R of shape n x m and S of shape
/// m x n, entries bounded by `max_entry`, and neither R nor S owning a zero
/// row. When `target_sr` is given, only pairs with `S*R = target` are
/// visited. Pairs arrive in lexicographic order of (flattened R, flattened
/// S); the visitor can stop the enumeration early.
///
/// The fill is backtracking with entrywise constraint propagation: row sums
/// of R are capped by row sums of c (every S row is positive somewhere),
/// partial products are pruned against c (and the target) entrywise, and
/// zero rows are cut as soon as they are forced.
pub fn enumerate_factorizations(
    c: &Matrix,
    m: usize,
    max_entry: i64,
    target_sr: Option<&Matrix>,
    visit: &mut dyn FnMut(Matrix, Matrix) -> ControlFlow<()>,
) -> ControlFlow<()> {
    debug_assert!(c.is_square());
    if let Some(b) = target_sr {
        debug_assert!(b.rows() == m && b.cols() == m);
    }
    let n = c.rows();
    let row_max: Vec<i64> = (0..n)
        .map(|i| c.row(i).iter().copied().max().unwrap_or(0))
        .collect();
    let row_sum: Vec<i64> = (0..n).map(|i| c.row(i).iter().sum()).collect();
    let mut state = FactorState {
        c,
        n,
        m,
        max_entry,
        target_sr,
        row_max,
        row_sum,
        r: vec![0; n * m],
        s: vec![0; m * n],
        partial: vec![0; n * n],
        row_b: vec![0; m * m],
    };
    state.fill_r(0, visit)
}

struct FactorState<'a> {
    c: &'a Matrix,
    n: usize,
    m: usize,
    max_entry: i64,
    target_sr: Option<&'a Matrix>,
    row_max: Vec<i64>,
    row_sum: Vec<i64>,
    /// R entries, row-major n x m.
    r: Vec<i64>,
    /// S entries, row-major m x n.
    s: Vec<i64>,
    /// Partial sums of R*S restricted to assigned S entries, row-major n x n.
    partial: Vec<i64>,
    /// Partial sums of S*R per S row, row-major m x m; row k accumulates
    /// while S row k is being filled.
    row_b: Vec<i64>,
}

impl FactorState<'_> {
    fn fill_r(
        &mut self,
        idx: usize,
        visit: &mut dyn FnMut(Matrix, Matrix) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if idx == self.n * self.m {
            return self.fill_s(0, visit);
        }
        let i = idx / self.m;
        let k = idx % self.m;
        let used: i64 = self.r[i * self.m..idx].iter().sum();
        // Every S row is positive somewhere, so sum_k R(i,k) <= sum_j c(i,j);
        // and R(i,k) <= max_j c(i,j) for the same reason.
        let cap = self
            .max_entry
            .min(self.row_max[i])
            .min(self.row_sum[i] - used);
        let start: i64 = if k == self.m - 1 && used == 0 { 1 } else { 0 };
        for value in start..=cap {
            self.r[idx] = value;
            self.fill_r(idx + 1, visit)?;
        }
        self.r[idx] = 0;
        ControlFlow::Continue(())
    }

    fn fill_s(
        &mut self,
        idx: usize,
        visit: &mut dyn FnMut(Matrix, Matrix) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if idx == self.m * self.n {
            let r = Matrix::new(self.n, self.m, self.r.clone()).expect("valid R");
            let s = Matrix::new(self.m, self.n, self.s.clone()).expect("valid S");
            return visit(r, s);
        }
        let k = idx / self.n;
        let j = idx % self.n;

        let mut cap = self.max_entry;
        // R(i,k) * S(k,j) can contribute at most what c(i,j) still allows.
        for i in 0..self.n {
            let coeff = self.r[i * self.m + k];
            if coeff > 0 {
                cap = cap.min((self.c.get(i, j) - self.partial[i * self.n + j]) / coeff);
            }
        }
        // Symmetric constraint against the target of S*R, when fixed.
        if let Some(b) = self.target_sr {
            for l in 0..self.m {
                let coeff = self.r[j * self.m + l];
                if coeff > 0 {
                    cap = cap.min((b.get(k, l) - self.row_b[k * self.m + l]) / coeff);
                }
            }
        }

        let row_used: i64 = self.s[k * self.n..idx].iter().sum();
        let start: i64 = if j == self.n - 1 && row_used == 0 { 1 } else { 0 };

        for value in start..=cap {
            let feasible = self.apply_s(k, j, value);
            if feasible {
                self.s[idx] = value;
                self.fill_s(idx + 1, visit)?;
                self.s[idx] = 0;
            }
            self.unapply_s(k, j, value);
        }
        ControlFlow::Continue(())
    }

    /// Adds `value` at S(k,j) into the running sums and checks feasibility.
    /// Always applies fully so that [`Self::unapply_s`] restores state.
    fn apply_s(&mut self, k: usize, j: usize, value: i64) -> bool {
        let mut ok = true;
        for i in 0..self.n {
            let cell = &mut self.partial[i * self.n + j];
            *cell += self.r[i * self.m + k] * value;
            let target = self.c.get(i, j);
            if *cell > target {
                ok = false;
            }
            // Rows k+1.. of S can still add at most suffix * max_entry here.
            let suffix: i64 = (k + 1..self.m).map(|k2| self.r[i * self.m + k2]).sum();
            if *cell + suffix * self.max_entry < target {
                ok = false;
            }
        }
        if let Some(b) = self.target_sr {
            for l in 0..self.m {
                self.row_b[k * self.m + l] += value * self.r[j * self.m + l];
                if self.row_b[k * self.m + l] > b.get(k, l) {
                    ok = false;
                }
            }
            // The S*R row k is complete once this S row is filled.
            if ok && j == self.n - 1 {
                ok = (0..self.m).all(|l| self.row_b[k * self.m + l] == b.get(k, l));
            }
        }
        // Column j of R*S is complete once the last S row reaches it.
        if ok && k == self.m - 1 {
            ok = (0..self.n).all(|i| self.partial[i * self.n + j] == self.c.get(i, j));
        }
        ok
    }

    fn unapply_s(&mut self, k: usize, j: usize, value: i64) {
        for i in 0..self.n {
            self.partial[i * self.n + j] -= self.r[i * self.m + k] * value;
        }
        if self.target_sr.is_some() {
            for l in 0..self.m {
                self.row_b[k * self.m + l] -= value * self.r[j * self.m + l];
            }
        }
    }
}
