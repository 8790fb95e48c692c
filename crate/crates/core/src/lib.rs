//! Strong shift equivalence for finite directed graphs.
//!
//! The crate decides, constructs, and machine-checks the combinatorial data
//! behind strong shift equivalence of non-negative integer matrices:
//!
//! - exact matrix arithmetic and regularity predicates ([`matrix`]);
//! - finite directed multigraphs with identified edges ([`graph`]);
//! - elementary witnesses `A = RS`, `B = SR`, chains of them, and bounded
//!   searches for both ([`sse`]);
//! - the bipartite inflation whose length-two paths recover both graphs
//!   ([`bipartite`]);
//! - the sliding-block conjugacy a witness induces between the edge shifts,
//!   verified on finite windows ([`shift`]);
//! - a formal Cuntz-Krieger algebra over the inflation and the certificate
//!   that both edge algebras sit as complementary full corners ([`ck`]).
//!
//! Everything is exact integer arithmetic; arithmetic that would overflow
//! `i64` panics instead of wrapping.

pub mod bipartite;
pub mod ck;
pub mod graph;
pub mod matrix;
pub mod report;
pub mod shift;
pub mod sse;

pub use bipartite::{build_bipartite, recover_side, BipartiteInflation, PathBijection, Side};
pub use ck::{certify_corner_embedding, check_equal, CkElement, EmbeddingMap, Equality};
pub use graph::{graph_from_matrix, Edge, Graph, GraphError, VertexSet};
pub use matrix::{Matrix, MatrixError};
pub use report::{Report, ReportItem};
pub use shift::{
    allowed_words, apply_code, conjugacy_code, periodic_word_count, verify_conjugacy_window,
    BlockCode, Word,
};
pub use sse::{
    search_chain, search_esse, verify_chain, verify_esse, EsseWitness, SearchBounds,
    SearchOutcome, SseChain, SseError, TraceRefutation,
};
