//! Exact arithmetic and predicates for finite non-negative integer matrices.
//!
//! Entries are `i64` and every operation uses checked arithmetic: anything
//! that would overflow panics instead of wrapping, so a refutation derived
//! from a trace power can be trusted.

use itertools::Itertools;
use thiserror::Error;

/// Hard cap for [`Matrix::canonical_form`]; permutations are enumerated
/// exhaustively, so the cap keeps the factorial in check.
pub const DEFAULT_CANON_CAP: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("entry count {got} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, got: usize },
    #[error("negative entry {value} at ({row},{col})")]
    NegativeEntry { row: usize, col: usize, value: i64 },
    #[error("dimension mismatch: {left_rows}x{left_cols} * {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("dimension {dim} exceeds canonical-form cap {cap}")]
    AboveCanonCap { dim: usize, cap: usize },
}

/// Dense row-major non-negative integer matrix.
///
/// Dimensions are positive and every entry is `>= 0`; both are checked at
/// construction. Values are immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyDimensions { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(MatrixError::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        for (idx, &value) in entries.iter().enumerate() {
            if value < 0 {
                return Err(MatrixError::NegativeEntry {
                    row: idx / cols,
                    col: idx % cols,
                    value,
                });
            }
        }
        Ok(Matrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from row slices; all rows must have equal positive length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(MatrixError::EntryCount {
                rows: nrows,
                cols: ncols,
                got: rows.iter().map(|r| r.len()).sum(),
            });
        }
        Matrix::new(nrows, ncols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Matrix::new(n, n, entries).expect("identity dimensions are positive")
    }

    pub fn zero(rows: usize, cols: usize) -> Result<Self, MatrixError> {
        Matrix::new(rows, cols, vec![0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn max_entry(&self) -> i64 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    /// Sum of all entries, checked.
    pub fn entry_sum(&self) -> i64 {
        self.entries
            .iter()
            .fold(0i64, |acc, &v| acc.checked_add(v).expect("entry sum overflow"))
    }

    /// Exact integer product. Panics on `i64` overflow rather than wrapping.
    pub fn multiply(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut entries = vec![0i64; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a
                        .checked_mul(other.get(k, j))
                        .expect("matrix product overflow");
                    let cell = &mut entries[i * other.cols + j];
                    *cell = cell.checked_add(term).expect("matrix product overflow");
                }
            }
        }
        Matrix::new(self.rows, other.cols, entries)
    }

    /// True iff every row contains at least one positive entry.
    pub fn is_regular(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).iter().any(|&v| v > 0))
    }

    /// Trace of the k-th power, exact. Requires a square matrix and `k >= 1`.
    pub fn trace_power(&self, k: usize) -> Result<i64, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if k == 0 {
            return Err(MatrixError::ZeroPower);
        }
        let mut power = self.clone();
        for _ in 1..k {
            power = power.multiply(self)?;
        }
        Ok((0..self.rows).fold(0i64, |acc, i| {
            acc.checked_add(power.get(i, i)).expect("trace overflow")
        }))
    }

    /// Canonical representative of the simultaneous row/column permutation
    /// orbit: the lexicographically smallest row-major flattening of
    /// `P * a * P^T` over all permutation matrices `P`. Idempotent.
    ///
    /// Enumerates all `n!` permutations, so `n` is capped (default
    /// [`DEFAULT_CANON_CAP`]).
    pub fn canonical_form(&self) -> Result<Matrix, MatrixError> {
        self.canonical_form_with_cap(DEFAULT_CANON_CAP)
    }

    pub fn canonical_form_with_cap(&self, cap: usize) -> Result<Matrix, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n > cap {
            return Err(MatrixError::AboveCanonCap { dim: n, cap });
        }
        let mut best: Option<Vec<i64>> = None;
        for perm in (0..n).permutations(n) {
            let mut flat = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    flat.push(self.get(perm[i], perm[j]));
                }
            }
            if best.as_ref().is_none_or(|b| flat < *b) {
                best = Some(flat);
            }
        }
        Matrix::new(n, n, best.expect("at least the identity permutation"))
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Independent oracle: counts closed edge paths of length `k` in the graph
    /// whose vertex matrix is `a`, by explicit recursive walk enumeration.
    /// Kept free of `Matrix::multiply` / `trace_power` on purpose.
    fn closed_path_count_oracle(a: &Matrix, k: usize) -> i64 {
        assert!(a.is_square() && k >= 1);
        let n = a.rows();
        fn walk(a: &Matrix, start: usize, at: usize, remaining: usize) -> i64 {
            if remaining == 0 {
                return i64::from(at == start);
            }
            let mut total = 0;
            for next in 0..a.rows() {
                // a(at, next) parallel edges, each a distinct choice
                total += a.get(at, next) * walk(a, start, next, remaining - 1);
            }
            total
        }
        (0..n).map(|v| walk(a, v, v, k)).sum()
    }

    /// Oracle for canonical_form: try every permutation, take the smallest
    /// flattening, constructed without going through canonical_form itself.
    fn canonical_oracle(a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut best: Option<Vec<i64>> = None;
        for perm in (0..n).permutations(n) {
            let flat: Vec<i64> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| a.get(perm[i], perm[j]))
                .collect();
            if best.as_ref().is_none_or(|b| flat < *b) {
                best = Some(flat);
            }
        }
        Matrix::new(n, n, best.unwrap()).unwrap()
    }

    fn example_r() -> Matrix {
        m(&[&[1, 1, 0], &[0, 0, 1]])
    }

    fn example_s() -> Matrix {
        m(&[&[1, 0], &[0, 1], &[0, 1]])
    }

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize, max: i64) -> Matrix {
        let entries = (0..rows * cols)
            .map(|_| rng.random_range(0..=max))
            .collect();
        Matrix::new(rows, cols, entries).unwrap()
    }

    #[test]
    fn multiply_example_rs() {
        let rs = example_r().multiply(&example_s()).unwrap();
        assert_eq!(rs, m(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn multiply_example_sr() {
        let sr = example_s().multiply(&example_r()).unwrap();
        assert_eq!(sr, m(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]]));
    }

    #[test]
    fn multiply_identity_is_noop() {
        let a = m(&[&[3, 0, 2], &[1, 1, 1]]);
        assert_eq!(a.multiply(&Matrix::identity(3)).unwrap(), a);
    }

    #[test]
    fn multiply_rejects_dimension_mismatch() {
        let a = m(&[&[1, 2]]);
        let b = m(&[&[1, 2]]);
        assert!(matches!(
            a.multiply(&b),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn regularity_examples() {
        assert!(m(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]]).is_regular());
        assert!(!m(&[&[0, 0], &[1, 0]]).is_regular());
        assert!(m(&[&[2]]).is_regular());
    }

    #[test]
    fn trace_power_matches_closed_path_oracle() {
        let a_e = m(&[&[1, 1], &[0, 1]]);
        let a_f = m(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]]);
        let two_loops = m(&[&[2]]);
        assert_eq!(closed_path_count_oracle(&a_e, 3), 2);
        assert_eq!(a_e.trace_power(3).unwrap(), 2);
        assert_eq!(closed_path_count_oracle(&a_f, 2), 2);
        assert_eq!(a_f.trace_power(2).unwrap(), 2);
        assert_eq!(closed_path_count_oracle(&two_loops, 4), 16);
        assert_eq!(two_loops.trace_power(4).unwrap(), 16);
    }

    #[test]
    fn trace_power_random_against_oracle() {
        let mut rng = StdRng::seed_from_u64(0);
        for _ in 0..50 {
            let n = rng.random_range(1..=3);
            let a = random_matrix(&mut rng, n, n, 2);
            for k in 1..=4 {
                assert_eq!(
                    a.trace_power(k).unwrap(),
                    closed_path_count_oracle(&a, k),
                    "a={a} k={k}"
                );
            }
        }
    }

    #[test]
    fn trace_power_rejects_non_square() {
        assert!(matches!(
            m(&[&[1, 2, 3], &[4, 5, 6]]).trace_power(2),
            Err(MatrixError::NotSquare { .. })
        ));
    }

    #[test]
    fn canonical_form_fixed_points_and_oracle() {
        let swap_symmetric = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            swap_symmetric.canonical_form().unwrap(),
            m(&[&[0, 1], &[1, 0]])
        );
        // Orbit of [[1,0],[1,1]] is itself and [[1,1],[0,1]]; the row-major
        // lexicographically smaller of the two is [[1,0],[1,1]].
        let lower = m(&[&[1, 0], &[1, 1]]);
        assert_eq!(canonical_oracle(&lower), m(&[&[1, 0], &[1, 1]]));
        assert_eq!(lower.canonical_form().unwrap(), canonical_oracle(&lower));
        let upper = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(upper.canonical_form().unwrap(), canonical_oracle(&lower));
    }

    #[test]
    fn canonical_form_idempotent() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.random_range(1..=4);
            let a = random_matrix(&mut rng, n, n, 3);
            let c = a.canonical_form().unwrap();
            assert_eq!(c.canonical_form().unwrap(), c);
        }
    }

    #[test]
    fn canonical_form_respects_cap() {
        let a = Matrix::identity(9);
        assert!(matches!(
            a.canonical_form(),
            Err(MatrixError::AboveCanonCap { dim: 9, cap: 8 })
        ));
        assert!(a.canonical_form_with_cap(9).is_ok());
    }

    #[test]
    fn canonical_form_invariant_under_permutation_exhaustive() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..30 {
            let n = rng.random_range(1..=4);
            let a = random_matrix(&mut rng, n, n, 2);
            let canon = a.canonical_form().unwrap();
            for perm in (0..n).permutations(n) {
                let permuted: Vec<i64> = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| a.get(perm[i], perm[j]))
                    .collect();
                let permuted = Matrix::new(n, n, permuted).unwrap();
                assert_eq!(permuted.canonical_form().unwrap(), canon);
            }
        }
    }

    #[test]
    fn product_associativity_random() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let (p, q, r, s) = (
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=3),
            );
            let a = random_matrix(&mut rng, p, q, 3);
            let b = random_matrix(&mut rng, q, r, 3);
            let c = random_matrix(&mut rng, r, s, 3);
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn trace_powers_of_rs_and_sr_agree() {
        let mut rng = StdRng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 200 {
            let n = rng.random_range(1..=4);
            let p = rng.random_range(1..=4);
            let r = random_matrix(&mut rng, n, p, 2);
            let s = random_matrix(&mut rng, p, n, 2);
            if !r.is_regular() || !s.is_regular() {
                continue;
            }
            let rs = r.multiply(&s).unwrap();
            let sr = s.multiply(&r).unwrap();
            for k in 1..=6 {
                assert_eq!(rs.trace_power(k).unwrap(), sr.trace_power(k).unwrap());
            }
            checked += 1;
        }
    }

    #[test]
    fn regular_product_implies_regular_left_factor() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let p = rng.random_range(1..=4);
            let r = random_matrix(&mut rng, n, p, 2);
            let s = random_matrix(&mut rng, p, n, 2);
            let rs = r.multiply(&s).unwrap();
            if rs.is_regular() {
                assert!(r.is_regular());
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            Matrix::new(0, 2, vec![]),
            Err(MatrixError::EmptyDimensions { .. })
        ));
        assert!(matches!(
            Matrix::new(1, 2, vec![1]),
            Err(MatrixError::EntryCount { .. })
        ));
        assert!(matches!(
            Matrix::new(1, 2, vec![1, -1]),
            Err(MatrixError::NegativeEntry { .. })
        ));
    }
}
