//! Simple undirected graphs over dense vertex ids with bit-row adjacency.

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

/// A set of vertices of one graph, stored as a bit row of length `n`.
pub type VertexSet = FixedBitSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("empty vertex set")]
    Empty,
}

/// An undirected edge, normalized so that `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[Vertex; 2]", from = "[Vertex; 2]")]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex) -> Edge {
        debug_assert_ne!(a, b, "an edge needs two distinct endpoints");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn contains(&self, w: Vertex) -> bool {
        self.u == w || self.v == w
    }

    /// The endpoint that is not `w`; `w` must be an endpoint.
    pub fn other(&self, w: Vertex) -> Vertex {
        if self.u == w {
            self.v
        } else {
            debug_assert_eq!(self.v, w);
            self.u
        }
    }

    pub fn meets(&self, other: &Edge) -> bool {
        self.contains(other.u) || self.contains(other.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

impl From<[Vertex; 2]> for Edge {
    fn from(p: [Vertex; 2]) -> Self {
        Edge::new(p[0], p[1])
    }
}

/// Distance layers around a seed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels {
    /// `levels[i]` holds the vertices at distance exactly `i`, ascending.
    pub levels: Vec<Vec<Vertex>>,
    /// Vertices in scope that the search never reached.
    pub unreachable: Vec<Vertex>,
    /// Distance per vertex; `usize::MAX` when unreached or out of scope.
    pub distance: Vec<usize>,
}

impl Levels {
    pub fn level(&self, i: usize) -> &[Vertex] {
        self.levels.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest distance of a reached vertex.
    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }
}

/// Immutable simple graph. Vertices are `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    rows: Vec<FixedBitSet>,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            m: 0,
            rows: vec![FixedBitSet::with_capacity(n); n],
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::empty(n);
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        g.finish();
        Ok(g)
    }

    fn add_edge(&mut self, a: Vertex, b: Vertex) -> Result<(), GraphError> {
        for w in [a, b] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if self.rows[a].contains(b) {
            return Err(GraphError::DuplicateEdge(Edge::new(a, b)));
        }
        self.rows[a].insert(b);
        self.rows[b].insert(a);
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.m += 1;
        Ok(())
    }

    fn finish(&mut self) {
        for list in &mut self.adj {
            list.sort_unstable();
        }
    }

    /// Parses the edge-list text format: optional `#` comment lines, a header
    /// `n m`, then exactly `m` lines `u v`.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut g = Graph::empty(0);
        let mut seen = 0usize;
        let mut last_line = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            last_line = line_no;
            let (a, b) = parse_pair(line).ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: format!("expected two non-negative integers, got {line:?}"),
            })?;
            match header {
                None => {
                    header = Some((a, b));
                    g = Graph::empty(a);
                }
                Some((_, m)) => {
                    if seen == m {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("more than the declared {m} edge lines"),
                        });
                    }
                    g.add_edge(a, b).map_err(|e| GraphError::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                    seen += 1;
                }
            }
        }
        match header {
            None => Err(GraphError::Parse {
                line: last_line.max(1),
                message: "missing header line \"n m\"".into(),
            }),
            Some((_, m)) if seen != m => Err(GraphError::Parse {
                line: last_line.max(1),
                message: format!("header declares {m} edges but {seen} were listed"),
            }),
            Some(_) => {
                g.finish();
                Ok(g)
            }
        }
    }

    /// Canonical text form: header, then edges in ascending order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for e in self.edges() {
            out.push_str(&format!("{} {}\n", e.u, e.v));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    /// Open neighborhood as a bit row.
    pub fn row(&self, v: Vertex) -> &FixedBitSet {
        &self.rows[v]
    }

    pub fn closed_row(&self, v: Vertex) -> FixedBitSet {
        let mut r = self.rows[v].clone();
        r.insert(v);
        r
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.rows[u].contains(v)
    }

    /// `N(u) ∩ N(v)` without `u` and `v`, ascending.
    pub fn common_neighbors(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let mut both = self.rows[u].clone();
        both.intersect_with(&self.rows[v]);
        both.set(u, false);
        both.set(v, false);
        both.ones().collect()
    }

    /// All edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| Edge { u, v })
        })
    }

    pub fn vertex_set(&self) -> VertexSet {
        let mut s = FixedBitSet::with_capacity(self.n);
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, vertices: &[Vertex]) -> VertexSet {
        let mut s = FixedBitSet::with_capacity(self.n);
        for &v in vertices {
            s.insert(v);
        }
        s
    }

    /// Distance layers from `seed` over the whole graph.
    pub fn bfs_levels(&self, seed: &[Vertex]) -> Levels {
        self.bfs_levels_within(seed, &self.vertex_set())
    }

    /// Distance layers from `seed` in the subgraph induced by `within`.
    /// Seed vertices outside `within` are ignored.
    pub fn bfs_levels_within(&self, seed: &[Vertex], within: &VertexSet) -> Levels {
        let mut distance = vec![usize::MAX; self.n];
        let mut levels: Vec<Vec<Vertex>> = Vec::new();
        let mut current: Vec<Vertex> = seed.iter().copied().filter(|&v| within.contains(v)).collect();
        current.sort_unstable();
        current.dedup();
        for &v in &current {
            distance[v] = 0;
        }
        let mut depth = 0;
        while !current.is_empty() {
            let mut next = Vec::new();
            for &v in &current {
                for &w in &self.adj[v] {
                    if distance[w] == usize::MAX && within.contains(w) {
                        distance[w] = depth + 1;
                        next.push(w);
                    }
                }
            }
            next.sort_unstable();
            levels.push(current);
            current = next;
            depth += 1;
        }
        let unreachable = within.ones().filter(|&v| distance[v] == usize::MAX).collect();
        Levels {
            levels,
            unreachable,
            distance,
        }
    }

    /// Connected components of the subgraph induced by `within`, each sorted,
    /// ordered by smallest vertex.
    pub fn connected_components(&self, within: &VertexSet) -> Vec<Vec<Vertex>> {
        let mut seen = FixedBitSet::with_capacity(self.n);
        let mut parts = Vec::new();
        let mut stack = Vec::new();
        for s in within.ones() {
            if seen.contains(s) {
                continue;
            }
            seen.insert(s);
            stack.push(s);
            let mut part = Vec::new();
            while let Some(v) = stack.pop() {
                part.push(v);
                for &w in &self.adj[v] {
                    if within.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            part.sort_unstable();
            parts.push(part);
        }
        parts
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.connected_components(&self.vertex_set()).len() == 1
    }

    /// A vertex of minimum eccentricity, smallest id on ties.
    pub fn central_vertex(&self) -> Result<(Vertex, usize), GraphError> {
        self.central_vertex_within(&self.vertex_set())
    }

    /// Central vertex of the connected subgraph induced by `within`.
    pub fn central_vertex_within(&self, within: &VertexSet) -> Result<(Vertex, usize), GraphError> {
        let size = within.count_ones(..);
        if size == 0 {
            return Err(GraphError::Empty);
        }
        let mut best: Option<(Vertex, usize)> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        for s in within.ones() {
            // BFS from s, abandoned once it cannot beat the best eccentricity.
            let bound = best.map(|(_, e)| e);
            let mut touched = vec![s];
            dist[s] = 0;
            queue.clear();
            queue.push_back(s);
            let mut reached = 1;
            let mut ecc = 0;
            let mut abandoned = false;
            while let Some(v) = queue.pop_front() {
                let d = dist[v];
                if bound.is_some_and(|b| d >= b) && d > 0 {
                    abandoned = true;
                    break;
                }
                for &w in &self.adj[v] {
                    if within.contains(w) && dist[w] == usize::MAX {
                        dist[w] = d + 1;
                        ecc = ecc.max(d + 1);
                        reached += 1;
                        touched.push(w);
                        queue.push_back(w);
                    }
                }
            }
            for &v in &touched {
                dist[v] = usize::MAX;
            }
            if abandoned {
                continue;
            }
            if reached != size {
                return Err(GraphError::Disconnected);
            }
            if best.is_none_or(|(_, e)| ecc < e) {
                best = Some((s, ecc));
            }
        }
        best.ok_or(GraphError::Empty)
    }

    /// Subgraph induced by `vertices` (relabelled `0..k` in the given order)
    /// together with the map back to original ids.
    pub fn induced(&self, vertices: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut h = Graph::empty(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = index[w];
                if j != usize::MAX && i < j {
                    h.add_edge(i, j).expect("induced edges are simple");
                }
            }
        }
        h.finish();
        (h, vertices.to_vec())
    }

    /// Disjoint union: vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let edges = self
            .edges()
            .map(|e| (e.u, e.v))
            .chain(other.edges().map(|e| (e.u + shift, e.v + shift)));
        Graph::from_edges(self.n + other.n, edges).expect("union of simple graphs is simple")
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "a cycle needs at least three vertices");
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
            .expect("clique is simple")
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let a = parts.next()?.parse().ok()?;
    let b = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_path() {
        let g = Graph::parse("3 2\n0 1\n1 2").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![Edge::new(0, 1), Edge::new(1, 2)]);
    }

    #[test]
    fn parse_single_vertex() {
        let g = Graph::parse("1 0").unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn parse_rejects_self_loop() {
        match Graph::parse("2 1\n0 0") {
            Err(GraphError::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(Graph::parse("# c\n3 2\n0 1\n0 1"), Err(GraphError::Parse { line: 4, .. })));
        assert!(matches!(Graph::parse("3 1\n0 7"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(Graph::parse("3 x"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(Graph::parse("3 2\n0 1"), Err(GraphError::Parse { .. })));
        assert!(matches!(Graph::parse(""), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn canonical_text() {
        let g = Graph::parse("# comment\n4 3\n2 3\n1 0\n1 2\n").unwrap();
        assert_eq!(g.to_text(), "4 3\n0 1\n1 2\n2 3\n");
    }

    #[test]
    fn adjacency_queries() {
        let c4 = Graph::cycle(4);
        assert_eq!(c4.common_neighbors(0, 2), vec![1, 3]);
        let k2 = Graph::path(2);
        assert_eq!(k2.degree(0), 1);
        assert!(k2.has_edge(0, 1));
        let p3 = Graph::path(3);
        assert!(p3.common_neighbors(0, 1).is_empty());
    }

    #[test]
    fn bfs_levels_examples() {
        let p5 = Graph::path(5);
        let l = p5.bfs_levels(&[1, 2]);
        assert_eq!(l.level(1), &[0, 3]);
        assert_eq!(l.level(2), &[4]);

        let c6 = Graph::cycle(6);
        let l = c6.bfs_levels(&[0, 1]);
        assert_eq!(l.level(1), &[2, 5]);
        assert_eq!(l.level(2), &[3, 4]);

        let k3 = Graph::complete(3);
        let l = k3.bfs_levels(&[0, 1]);
        assert_eq!(l.level(1), &[2]);
        assert_eq!(l.depth(), 1);
    }

    #[test]
    fn bfs_reports_unreachable() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let l = g.bfs_levels(&[0]);
        assert_eq!(l.unreachable, vec![2, 3]);
    }

    #[test]
    fn components() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.connected_components(&g.vertex_set()), vec![vec![0, 1], vec![2, 3]]);
        let c5 = Graph::cycle(5);
        assert_eq!(c5.connected_components(&c5.vertex_set()).len(), 1);
        let p4 = Graph::path(4);
        assert_eq!(p4.connected_components(&p4.set_of(&[0, 3])), vec![vec![0], vec![3]]);
    }

    #[test]
    fn central_vertices() {
        assert_eq!(Graph::path(9).central_vertex().unwrap(), (4, 4));
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.central_vertex().unwrap(), (0, 1));
        assert_eq!(Graph::cycle(6).central_vertex().unwrap(), (0, 3));
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(split.central_vertex(), Err(GraphError::Disconnected));
    }

    #[test]
    fn induced_subgraph() {
        let c5 = Graph::cycle(5);
        let (h, map) = c5.induced(&[0, 1, 2]);
        assert_eq!(h.to_text(), "3 2\n0 1\n1 2\n");
        assert_eq!(map, vec![0, 1, 2]);
    }
}
