//! Dominating induced matchings.
//!
//! A dominating induced matching (d.i.m.) of a graph is an induced matching
//! that shares a vertex with every edge exactly once. [`solve`] decides
//! existence and returns a verified certificate; the [`oracle`] module holds
//! an exhaustive reference search.

pub mod coloring;
pub mod component;
pub mod decomposition;
pub mod driver;
pub mod generator;
pub mod graph;
pub mod oracle;
pub mod patterns;

pub use coloring::{Color, Coloring, Contradiction, ContradictionKind, Matching, MatchingError};
pub use driver::{solve, verify_outcome, SolveConfig, SolveOutcome, SolveStats, Status};
pub use graph::{Edge, Graph, GraphError, Vertex, VertexSet};
pub use oracle::{count_dims, oracle_dim, verify_dim, OracleReport, Verdict};
