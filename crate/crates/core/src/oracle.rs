//! Brute-force ground truth: the d.i.m. verifier and an exhaustive search.
//!
//! Written from the definitions alone; it shares nothing with the solver
//! besides [`Graph`] and the [`Matching`] container.

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::Matching;
use crate::graph::{Edge, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// Two matching edges share this vertex.
    SharedVertex,
    /// The edge joins two different matching edges.
    JoiningEdge,
    /// The edge meets no matching edge.
    Undominated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub edge: Edge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("matching edge {0} is not an edge of the graph")]
    UnknownEdge(Edge),
}

/// Checks that every edge of `g` shares a vertex with exactly one edge of `m`.
pub fn verify_dim(g: &Graph, m: &Matching) -> Result<Verdict, VerifyError> {
    verify_edges(g, m.edges())
}

/// Like [`verify_dim`] for an arbitrary edge list, which may repeat vertices.
pub fn verify_edges(g: &Graph, edges: &[Edge]) -> Result<Verdict, VerifyError> {
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (i, e) in edges.iter().enumerate() {
        if e.u >= g.n() || e.v >= g.n() || !g.has_edge(e.u, e.v) {
            return Err(VerifyError::UnknownEdge(*e));
        }
        for w in [e.u, e.v] {
            if owner[w].is_some() {
                return Ok(Verdict::Invalid(Violation { kind: ViolationKind::SharedVertex, edge: *e }));
            }
            owner[w] = Some(i);
        }
    }
    for e in g.edges() {
        let kind = match (owner[e.u], owner[e.v]) {
            (None, None) => ViolationKind::Undominated,
            (Some(a), Some(b)) if a != b => ViolationKind::JoiningEdge,
            _ => continue,
        };
        return Ok(Verdict::Invalid(Violation { kind, edge: e }));
    }
    Ok(Verdict::Valid)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub found: Option<Matching>,
    /// Number of d.i.m.s; present only when counting ran to completion.
    pub count: Option<u64>,
    pub explored: u64,
    pub limit_hit: bool,
}

struct Search<'a, F: FnMut(&[Edge]) -> bool> {
    g: &'a Graph,
    edges: Vec<Edge>,
    /// Edges that must be covered once the decision at index i is made.
    due: Vec<Vec<usize>>,
    in_m: FixedBitSet,
    chosen: Vec<Edge>,
    explored: u64,
    limit: u64,
    limit_hit: bool,
    on_found: F,
    stop: bool,
}

impl<F: FnMut(&[Edge]) -> bool> Search<'_, F> {
    fn run(&mut self, i: usize) {
        if self.stop {
            return;
        }
        self.explored += 1;
        if self.explored > self.limit {
            self.limit_hit = true;
            self.stop = true;
            return;
        }
        if i == self.edges.len() {
            if !(self.on_found)(&self.chosen) {
                self.stop = true;
            }
            return;
        }
        let e = self.edges[i];
        let free = !self.in_m.contains(e.u)
            && !self.in_m.contains(e.v)
            && self.g.neighbors(e.u).iter().chain(self.g.neighbors(e.v)).all(|&w| !self.in_m.contains(w));
        if free {
            self.in_m.insert(e.u);
            self.in_m.insert(e.v);
            self.chosen.push(e);
            if self.deadlines_met(i) {
                self.run(i + 1);
            }
            self.chosen.pop();
            self.in_m.set(e.u, false);
            self.in_m.set(e.v, false);
        }
        if self.deadlines_met(i) {
            self.run(i + 1);
        }
    }

    fn deadlines_met(&self, i: usize) -> bool {
        self.due[i].iter().all(|&j| {
            let f = self.edges[j];
            self.in_m.contains(f.u) || self.in_m.contains(f.v)
        })
    }
}

/// Runs the include/exclude search, calling `on_found` for every d.i.m. until
/// it returns `false`. Returns (explored nodes, limit hit).
fn search<F: FnMut(&[Edge]) -> bool>(g: &Graph, limit: u64, on_found: F) -> (u64, bool) {
    let edges: Vec<Edge> = g.edges().collect();
    let mut last_at: Vec<Option<usize>> = vec![None; g.n()];
    for (i, e) in edges.iter().enumerate() {
        last_at[e.u] = Some(i);
        last_at[e.v] = Some(i);
    }
    let mut due = vec![Vec::new(); edges.len()];
    for (j, f) in edges.iter().enumerate() {
        let deadline = last_at[f.u].max(last_at[f.v]).expect("edge endpoints have edges");
        due[deadline].push(j);
    }
    let mut s = Search {
        g,
        edges,
        due,
        in_m: FixedBitSet::with_capacity(g.n()),
        chosen: Vec::new(),
        explored: 0,
        limit,
        limit_hit: false,
        on_found,
        stop: false,
    };
    s.run(0);
    (s.explored, s.limit_hit)
}

fn to_matching(edges: &[Edge]) -> Matching {
    let mut m = Matching::new(edges.to_vec()).expect("search keeps edges disjoint");
    m.mark_certified();
    m
}

/// First d.i.m. in search order, or none.
pub fn oracle_dim(g: &Graph, limit: u64) -> OracleReport {
    let mut found = None;
    let (explored, limit_hit) = search(g, limit, |m| {
        found = Some(to_matching(m));
        false
    });
    OracleReport { found, count: None, explored, limit_hit }
}

/// Counts all d.i.m.s; `found` holds the first one.
pub fn count_dims(g: &Graph, limit: u64) -> OracleReport {
    let mut found = None;
    let mut count = 0u64;
    let (explored, limit_hit) = search(g, limit, |m| {
        if found.is_none() {
            found = Some(to_matching(m));
        }
        count += 1;
        true
    });
    OracleReport { found, count: (!limit_hit).then_some(count), explored, limit_hit }
}

/// Every d.i.m. of `g`, or `None` when the node limit is hit.
pub fn all_dims(g: &Graph, limit: u64) -> Option<Vec<Matching>> {
    let mut out = Vec::new();
    let (_, limit_hit) = search(g, limit, |m| {
        out.push(to_matching(m));
        true
    });
    (!limit_hit).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIMIT: u64 = 10_000_000;

    fn m(edges: &[(usize, usize)]) -> Matching {
        Matching::new(edges.iter().map(|&(a, b)| Edge::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn verify_examples() {
        assert!(verify_dim(&Graph::cycle(6), &m(&[(0, 1), (3, 4)])).unwrap().is_valid());
        assert_eq!(
            verify_dim(&Graph::cycle(5), &m(&[(0, 1)])).unwrap(),
            Verdict::Invalid(Violation { kind: ViolationKind::Undominated, edge: Edge::new(2, 3) })
        );
        assert_eq!(
            verify_dim(&Graph::path(4), &m(&[(0, 1), (2, 3)])).unwrap(),
            Verdict::Invalid(Violation { kind: ViolationKind::JoiningEdge, edge: Edge::new(1, 2) })
        );
        assert!(verify_dim(&Graph::path(4), &m(&[(1, 2)])).unwrap().is_valid());
        assert_eq!(
            verify_dim(&Graph::path(3), &m(&[(0, 2)])),
            Err(VerifyError::UnknownEdge(Edge::new(0, 2)))
        );
        let shared = verify_edges(&Graph::path(3), &[Edge::new(0, 1), Edge::new(1, 2)]).unwrap();
        assert!(matches!(shared, Verdict::Invalid(Violation { kind: ViolationKind::SharedVertex, .. })));
    }

    #[test]
    fn oracle_examples() {
        let r = oracle_dim(&Graph::cycle(5), LIMIT);
        assert!(r.found.is_none() && !r.limit_hit);
        assert_eq!(oracle_dim(&Graph::path(4), LIMIT).found.unwrap(), m(&[(1, 2)]));
        let c9 = Graph::cycle(9);
        let found = oracle_dim(&c9, LIMIT).found.unwrap();
        assert_eq!(found.len(), 3);
        assert!(verify_dim(&c9, &found).unwrap().is_valid());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_dims(&Graph::cycle(6), LIMIT).count, Some(3));
        assert_eq!(count_dims(&Graph::complete(3), LIMIT).count, Some(3));
        assert_eq!(count_dims(&Graph::cycle(4), LIMIT).count, Some(0));
        assert_eq!(count_dims(&Graph::empty(4), LIMIT).count, Some(1));
    }

    #[test]
    fn limit_is_reported() {
        let r = count_dims(&Graph::cycle(12), 5);
        assert!(r.limit_hit);
        assert_eq!(r.count, None);
    }
}
