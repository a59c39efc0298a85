//! Black/white vertex colorings and the propagation engine.
//!
//! A coloring is feasible while the white vertices are independent and every
//! black vertex has at most one black neighbor. A complete feasible coloring is
//! exactly a dominating induced matching: the matching edges are the
//! black-black edges.
//!
//! Propagation rules, run to a fixpoint after every assignment:
//!
//! * a white vertex makes every neighbor black;
//! * a black vertex with one black neighbor fixes that neighbor as its mate
//!   and whitens all its other neighbors;
//! * a black vertex without a black neighbor and exactly one possible mate
//!   left makes that vertex black;
//! * an uncolored vertex that could not get a mate (two black neighbors, a
//!   black neighbor that is already mated, or no candidate at all) becomes
//!   white.
//!
//! Two black neighbors of a black vertex, a white-white edge, or a black vertex
//! with no possible mate is a contradiction.
//!
//! A [`MateFilter`] can additionally declare some edges unable to be matching
//! edges; the endpoints of such an edge then always take opposite colors.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Unknown,
    White,
    Black,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ContradictionKind {
    /// The vertex already carries the opposite color.
    Recolor,
    WhiteEdge,
    TwoBlackNeighbors,
    NoMate,
    /// Two adjacent black vertices whose edge cannot be a matching edge.
    ExcludedMate,
    /// Raised by structural rules outside the propagation engine.
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Error)]
#[error("{kind:?} at {witnesses:?}")]
pub struct Contradiction {
    pub kind: ContradictionKind,
    pub witnesses: Vec<Vertex>,
}

impl Contradiction {
    pub fn new(kind: ContradictionKind, witnesses: Vec<Vertex>) -> Self {
        Contradiction { kind, witnesses }
    }
}

/// Per-vertex classes plus a predicate naming the class pairs whose edges can
/// never be matching edges.
#[derive(Clone)]
pub struct MateFilter {
    class: Vec<u8>,
    excluded: fn(u8, u8) -> bool,
}

impl MateFilter {
    pub fn new(class: Vec<u8>, excluded: fn(u8, u8) -> bool) -> Self {
        MateFilter { class, excluded }
    }

    pub fn allows(&self, a: Vertex, b: Vertex) -> bool {
        !(self.excluded)(self.class[a], self.class[b])
    }
}

impl fmt::Debug for MateFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MateFilter").field("class", &self.class).finish()
    }
}

#[derive(Clone, Debug)]
pub struct Coloring {
    color: Vec<Color>,
    mate: Vec<Option<Vertex>>,
    black_nbrs: Vec<u32>,
    queue: VecDeque<Vertex>,
    queued: FixedBitSet,
    filter: Option<Arc<MateFilter>>,
    colored: usize,
}

impl Coloring {
    /// All vertices uncolored.
    pub fn new(n: usize) -> Coloring {
        Coloring {
            color: vec![Color::Unknown; n],
            mate: vec![None; n],
            black_nbrs: vec![0; n],
            queue: VecDeque::new(),
            queued: FixedBitSet::with_capacity(n),
            filter: None,
            colored: 0,
        }
    }

    /// Coloring with every vertex fixed; propagation is not run.
    pub fn from_colors(g: &Graph, colors: &[Color]) -> Coloring {
        let mut c = Coloring::new(g.n());
        for (v, &col) in colors.iter().enumerate() {
            if col != Color::Unknown {
                c.set(g, v, col);
            }
        }
        c.queue.clear();
        c.queued.clear();
        for v in 0..g.n() {
            if c.color[v] == Color::Black {
                let blacks: Vec<Vertex> = c.black_neighbors(g, v).collect();
                if blacks.len() == 1 {
                    c.mate[v] = Some(blacks[0]);
                }
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.color.len()
    }

    pub fn is_empty(&self) -> bool {
        self.color.is_empty()
    }

    pub fn color(&self, v: Vertex) -> Color {
        self.color[v]
    }

    pub fn colors(&self) -> &[Color] {
        &self.color
    }

    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        self.mate[v]
    }

    pub fn is_white(&self, v: Vertex) -> bool {
        self.color[v] == Color::White
    }

    pub fn is_black(&self, v: Vertex) -> bool {
        self.color[v] == Color::Black
    }

    pub fn is_unknown(&self, v: Vertex) -> bool {
        self.color[v] == Color::Unknown
    }

    /// Still undecided: uncolored, or black without a known mate.
    pub fn is_open(&self, v: Vertex) -> bool {
        match self.color[v] {
            Color::Unknown => true,
            Color::Black => self.mate[v].is_none(),
            Color::White => false,
        }
    }

    pub fn colored_count(&self) -> usize {
        self.colored
    }

    pub fn filter(&self) -> Option<&MateFilter> {
        self.filter.as_deref()
    }

    pub fn set_filter(&mut self, filter: Option<Arc<MateFilter>>) {
        self.filter = filter;
    }

    fn mate_allowed(&self, a: Vertex, b: Vertex) -> bool {
        self.filter.as_ref().is_none_or(|f| f.allows(a, b))
    }

    fn black_neighbors<'a>(&'a self, g: &'a Graph, v: Vertex) -> impl Iterator<Item = Vertex> + 'a {
        g.neighbors(v).iter().copied().filter(move |&w| self.color[w] == Color::Black)
    }

    /// Uncolored neighbors that could still become the mate of `v`.
    pub fn mate_candidates(&self, g: &Graph, v: Vertex) -> Vec<Vertex> {
        g.neighbors(v)
            .iter()
            .copied()
            .filter(|&w| self.color[w] == Color::Unknown && self.mate_allowed(v, w))
            .collect()
    }

    fn enqueue(&mut self, v: Vertex) {
        if !self.queued.contains(v) {
            self.queued.insert(v);
            self.queue.push_back(v);
        }
    }

    fn set(&mut self, g: &Graph, v: Vertex, c: Color) {
        debug_assert_eq!(self.color[v], Color::Unknown);
        self.color[v] = c;
        self.colored += 1;
        self.enqueue(v);
        for &w in g.neighbors(v) {
            if c == Color::Black {
                self.black_nbrs[w] += 1;
            }
            self.enqueue(w);
        }
    }

    fn assign(&mut self, g: &Graph, v: Vertex, c: Color) -> Result<(), Contradiction> {
        match self.color[v] {
            Color::Unknown => {
                self.set(g, v, c);
                Ok(())
            }
            cur if cur == c => Ok(()),
            _ => Err(Contradiction::new(ContradictionKind::Recolor, vec![v])),
        }
    }

    /// Colors `v` and propagates to a fixpoint. On contradiction the coloring
    /// is left partially updated; clone before calling to keep a snapshot.
    pub fn assign_and_propagate(&mut self, g: &Graph, v: Vertex, c: Color) -> Result<(), Contradiction> {
        assert_ne!(c, Color::Unknown, "cannot assign Unknown");
        self.assign(g, v, c)?;
        self.propagate(g)
    }

    /// Makes both endpoints black (and hence mates) and propagates.
    pub fn assign_edge(&mut self, g: &Graph, e: Edge) -> Result<(), Contradiction> {
        self.assign(g, e.u, Color::Black)?;
        self.assign(g, e.v, Color::Black)?;
        self.propagate(g)
    }

    /// Re-examines every vertex. A no-op on a coloring already at fixpoint.
    pub fn propagate_all(&mut self, g: &Graph) -> Result<(), Contradiction> {
        for v in 0..self.len() {
            self.enqueue(v);
        }
        self.propagate(g)
    }

    pub fn propagate(&mut self, g: &Graph) -> Result<(), Contradiction> {
        while let Some(v) = self.queue.pop_front() {
            self.queued.set(v, false);
            if let Err(e) = self.process(g, v) {
                self.queue.clear();
                self.queued.clear();
                return Err(e);
            }
        }
        Ok(())
    }

    fn process(&mut self, g: &Graph, v: Vertex) -> Result<(), Contradiction> {
        match self.color[v] {
            Color::White => {
                for &w in g.neighbors(v) {
                    match self.color[w] {
                        Color::White => {
                            return Err(Contradiction::new(ContradictionKind::WhiteEdge, vec![v, w]))
                        }
                        Color::Unknown => self.set(g, w, Color::Black),
                        Color::Black => {}
                    }
                }
            }
            Color::Black => self.process_black(g, v)?,
            Color::Unknown => {
                if !self.could_be_black(g, v) {
                    self.set(g, v, Color::White);
                }
            }
        }
        Ok(())
    }

    /// Whether `v` has a possible mate: one black neighbor that is free and
    /// allowed, or no black neighbor and some allowed uncolored one.
    fn could_be_black(&self, g: &Graph, v: Vertex) -> bool {
        match self.black_nbrs[v] {
            0 => g
                .neighbors(v)
                .iter()
                .any(|&w| self.color[w] == Color::Unknown && self.mate_allowed(v, w)),
            1 => {
                let w = self.black_neighbors(g, v).next().expect("counted black neighbor");
                self.mate[w].is_none() && self.mate_allowed(v, w)
            }
            _ => false,
        }
    }

    fn process_black(&mut self, g: &Graph, v: Vertex) -> Result<(), Contradiction> {
        match self.black_nbrs[v] {
            0 => {
                let mut only = None;
                let mut count = 0;
                for &w in g.neighbors(v) {
                    if self.color[w] != Color::Unknown {
                        continue;
                    }
                    if self.mate_allowed(v, w) {
                        count += 1;
                        only = Some(w);
                    } else {
                        // w black would need v as its mate
                        self.set(g, w, Color::White);
                    }
                }
                match (count, only) {
                    (0, _) => return Err(Contradiction::new(ContradictionKind::NoMate, vec![v])),
                    (1, Some(w)) => self.set(g, w, Color::Black),
                    _ => {}
                }
            }
            1 => {
                let w = self.black_neighbors(g, v).next().expect("counted black neighbor");
                if !self.mate_allowed(v, w) {
                    return Err(Contradiction::new(ContradictionKind::ExcludedMate, vec![v, w]));
                }
                if let Some(z) = self.mate[w] {
                    if z != v {
                        return Err(Contradiction::new(ContradictionKind::TwoBlackNeighbors, vec![w, v, z]));
                    }
                }
                if self.mate[v].is_none() {
                    self.mate[v] = Some(w);
                    self.mate[w] = Some(v);
                    self.enqueue(w);
                }
                for &z in g.neighbors(v) {
                    if self.color[z] == Color::Unknown {
                        self.set(g, z, Color::White);
                    }
                }
            }
            _ => {
                let mut blacks = self.black_neighbors(g, v);
                let a = blacks.next().expect("black neighbor");
                let b = blacks.next().expect("second black neighbor");
                return Err(Contradiction::new(ContradictionKind::TwoBlackNeighbors, vec![v, a, b]));
            }
        }
        Ok(())
    }

    /// No uncolored vertex, whites independent, every black vertex with exactly
    /// one black neighbor.
    pub fn is_complete_feasible(&self, g: &Graph) -> bool {
        (0..g.n()).all(|v| match self.color[v] {
            Color::Unknown => false,
            Color::White => g.neighbors(v).iter().all(|&w| self.color[w] == Color::Black),
            Color::Black => self.black_neighbors(g, v).count() == 1,
        })
    }

    /// Partial feasibility over all vertices.
    pub fn is_feasible(&self, g: &Graph) -> bool {
        (0..g.n()).all(|v| match self.color[v] {
            Color::Unknown => true,
            Color::White => g.neighbors(v).iter().all(|&w| self.color[w] != Color::White),
            Color::Black => self.black_neighbors(g, v).count() <= 1,
        })
    }

    /// The black-black edges of a complete feasible coloring.
    pub fn extract_matching(&self, g: &Graph) -> Result<Matching, ColoringError> {
        if !self.is_complete_feasible(g) {
            return Err(ColoringError::NotCompleteFeasible);
        }
        let edges = g
            .edges()
            .filter(|e| self.color[e.u] == Color::Black && self.color[e.v] == Color::Black)
            .collect();
        Ok(Matching::new(edges).expect("black degree one gives disjoint edges"))
    }

    /// Whether the coloring agrees with the vertex partition of `m`.
    pub fn consistent_with(&self, m: &Matching) -> bool {
        let covered = m.covered(self.len());
        (0..self.len()).all(|v| match self.color[v] {
            Color::Unknown => true,
            Color::Black => covered.contains(v),
            Color::White => !covered.contains(v),
        })
    }

    /// Coloring induced by a matching: its vertices black, everything else white.
    pub fn from_matching(g: &Graph, m: &Matching) -> Coloring {
        let covered = m.covered(g.n());
        let colors: Vec<Color> = (0..g.n())
            .map(|v| if covered.contains(v) { Color::Black } else { Color::White })
            .collect();
        Coloring::from_colors(g, &colors)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("coloring is not complete and feasible")]
    NotCompleteFeasible,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("edges {0} and {1} share a vertex")]
    SharedVertex(Edge, Edge),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge {0} is not in the graph")]
    UnknownEdge(Edge),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A set of pairwise vertex-disjoint edges, kept sorted. Equality ignores the
/// certification flag.
#[derive(Clone, Debug, Default, Eq, Serialize)]
pub struct Matching {
    edges: Vec<Edge>,
    #[serde(skip)]
    certified: bool,
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl Matching {
    pub fn new(mut edges: Vec<Edge>) -> Result<Matching, MatchingError> {
        edges.sort_unstable();
        edges.dedup();
        let mut owner: std::collections::HashMap<Vertex, Edge> = std::collections::HashMap::new();
        for &e in &edges {
            for w in [e.u, e.v] {
                if let Some(&f) = owner.get(&w) {
                    return Err(MatchingError::SharedVertex(f, e));
                }
                owner.insert(w, e);
            }
        }
        Ok(Matching { edges, certified: false })
    }

    pub fn empty() -> Matching {
        Matching::default()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// Set once a verifier accepted the matching as a d.i.m. of its graph.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub(crate) fn mark_certified(&mut self) {
        self.certified = true;
    }

    /// Vertices covered by the matching.
    pub fn covered(&self, n: usize) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(n);
        for e in &self.edges {
            s.insert(e.u);
            s.insert(e.v);
        }
        s
    }

    /// Reads `u v` lines (comments and blank lines allowed) and checks every
    /// edge against `g`.
    pub fn parse(text: &str, g: &Graph) -> Result<Matching, MatchingError> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| MatchingError::Parse { line: idx + 1, message };
            let nums: Vec<&str> = line.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(err(format!("expected \"u v\", got {line:?}")));
            }
            let a: Vertex = nums[0].parse().map_err(|_| err(format!("bad vertex {:?}", nums[0])))?;
            let b: Vertex = nums[1].parse().map_err(|_| err(format!("bad vertex {:?}", nums[1])))?;
            if a == b {
                return Err(err(format!("self-loop at {a}")));
            }
            if !g.has_edge(a, b) {
                return Err(MatchingError::UnknownEdge(Edge::new(a, b)));
            }
            edges.push(Edge::new(a, b));
        }
        Matching::new(edges)
    }

    pub fn to_text(&self) -> String {
        self.edges.iter().map(|e| format!("{} {}\n", e.u, e.v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::*;

    #[test]
    fn white_end_of_path_forces_chain() {
        let g = Graph::path(3);
        let mut c = Coloring::new(3);
        c.assign_and_propagate(&g, 0, White).unwrap();
        assert_eq!(c.colors(), &[White, Black, Black]);
        assert_eq!(c.mate(1), Some(2));
        assert!(c.is_complete_feasible(&g));
    }

    #[test]
    fn triangle_white_vertex_mates_the_rest() {
        let g = Graph::complete(3);
        let mut c = Coloring::new(3);
        c.assign_and_propagate(&g, 0, White).unwrap();
        assert_eq!(c.colors(), &[White, Black, Black]);
        assert_eq!(c.mate(1), Some(2));
    }

    #[test]
    fn c4_edge_is_contradictory() {
        let g = Graph::cycle(4);
        let mut c = Coloring::new(4);
        c.assign_and_propagate(&g, 0, Black).unwrap();
        let err = c.assign_and_propagate(&g, 1, Black).unwrap_err();
        assert_eq!(err.kind, ContradictionKind::WhiteEdge);
    }

    #[test]
    fn recolor_is_reported() {
        let g = Graph::path(2);
        let mut c = Coloring::new(2);
        c.assign_and_propagate(&g, 0, Black).unwrap();
        let err = c.assign_and_propagate(&g, 0, White).unwrap_err();
        assert_eq!(err.kind, ContradictionKind::Recolor);
    }

    #[test]
    fn complete_feasibility() {
        let c6 = Graph::cycle(6);
        let c = Coloring::from_colors(&c6, &[Black, Black, White, Black, Black, White]);
        assert!(c.is_complete_feasible(&c6));
        let k2 = Graph::path(2);
        assert!(!Coloring::from_colors(&k2, &[Black, White]).is_complete_feasible(&k2));
        let p3 = Graph::path(3);
        assert!(Coloring::from_colors(&p3, &[White, Black, Black]).is_complete_feasible(&p3));
    }

    #[test]
    fn matching_extraction() {
        let c6 = Graph::cycle(6);
        let c = Coloring::from_colors(&c6, &[Black, Black, White, Black, Black, White]);
        let m = c.extract_matching(&c6).unwrap();
        assert_eq!(m.edges(), &[Edge::new(0, 1), Edge::new(3, 4)]);

        let k2 = Graph::path(2);
        let m = Coloring::from_colors(&k2, &[Black, Black]).extract_matching(&k2).unwrap();
        assert_eq!(m.edges(), &[Edge::new(0, 1)]);

        let e = Graph::empty(3);
        let m = Coloring::from_colors(&e, &[White; 3]).extract_matching(&e).unwrap();
        assert!(m.is_empty());

        let bad = Coloring::from_colors(&k2, &[Black, White]);
        assert_eq!(bad.extract_matching(&k2), Err(ColoringError::NotCompleteFeasible));
    }

    #[test]
    fn unknown_between_two_blacks_turns_white() {
        // 0 - 1 - 2 with 0 and 2 black and not yet mated elsewhere
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 3), (2, 4)]).unwrap();
        let mut c = Coloring::new(5);
        c.assign(&g, 0, Black).unwrap();
        c.assign(&g, 2, Black).unwrap();
        c.propagate(&g).unwrap();
        assert_eq!(c.color(1), White);
    }

    #[test]
    fn excluded_mates_take_opposite_colors() {
        let g = Graph::path(3);
        // edge 1-2 may not be a matching edge
        let filter = MateFilter::new(vec![0, 1, 1], |a, b| a == 1 && b == 1);
        let mut c = Coloring::new(3);
        c.set_filter(Some(Arc::new(filter)));
        c.assign_and_propagate(&g, 1, Black).unwrap();
        assert_eq!(c.colors(), &[Black, Black, White]);
        assert_eq!(c.mate(1), Some(0));
    }

    #[test]
    fn matching_rejects_shared_vertices() {
        assert!(matches!(
            Matching::new(vec![Edge::new(0, 1), Edge::new(1, 2)]),
            Err(MatchingError::SharedVertex(_, _))
        ));
    }

    #[test]
    fn matching_file_roundtrip() {
        let c6 = Graph::cycle(6);
        let m = Matching::parse("# m\n0 1\n4 3\n", &c6).unwrap();
        assert_eq!(m.to_text(), "0 1\n3 4\n");
        assert!(matches!(Matching::parse("0 2\n", &c6), Err(MatchingError::UnknownEdge(_))));
        assert!(matches!(Matching::parse("0 1 2\n", &c6), Err(MatchingError::Parse { line: 1, .. })));
    }
}
