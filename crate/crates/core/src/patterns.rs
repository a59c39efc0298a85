//! Detectors for the small induced subgraphs the solver reacts to.
//!
//! Every detector walks vertices in ascending order, so the first hit and the
//! order of reported hits are reproducible.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::graph::{Edge, Graph, Vertex, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PatternKind {
    K4,
    Diamond,
    Butterfly,
    InducedPath(usize),
    InducedCycle(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternHit {
    pub kind: PatternKind,
    /// Diamond: `[u, v2, v1, v3]` with mid-edge `u v2`. Butterfly: `[u, v1, v2,
    /// v3, v4]` with center `u`. Paths and cycles: in traversal order.
    pub vertices: Vec<Vertex>,
    /// Edges every dominating induced matching must contain.
    pub forced_edges: Vec<Edge>,
}

/// Lexicographically first K4, if any.
pub fn find_k4(g: &Graph) -> Option<PatternHit> {
    for a in 0..g.n() {
        for &b in g.neighbors(a).iter().filter(|&&b| b > a) {
            let mut common = g.row(a).clone();
            common.intersect_with(g.row(b));
            for c in common.ones().filter(|&c| c > b) {
                if let Some(d) = common.ones().find(|&d| d > c && g.has_edge(c, d)) {
                    return Some(PatternHit {
                        kind: PatternKind::K4,
                        vertices: vec![a, b, c, d],
                        forced_edges: Vec::new(),
                    });
                }
            }
        }
    }
    None
}

/// All induced diamonds and butterflies of a K4-free graph together with the
/// edges they force.
pub fn scan_forced_patterns(g: &Graph) -> Vec<PatternHit> {
    let mut hits = Vec::new();
    // Diamonds: the mid-edge u-v2 has two non-adjacent common neighbors.
    for e in g.edges() {
        let common = g.common_neighbors(e.u, e.v);
        for (i, &v1) in common.iter().enumerate() {
            for &v3 in &common[i + 1..] {
                if !g.has_edge(v1, v3) {
                    hits.push(PatternHit {
                        kind: PatternKind::Diamond,
                        vertices: vec![e.u, e.v, v1, v3],
                        forced_edges: vec![e],
                    });
                }
            }
        }
    }
    // Butterflies: two edges inside N(u) with no edge between them.
    for u in 0..g.n() {
        let nbrs = g.neighbors(u);
        let inner: Vec<Edge> = nbrs
            .iter()
            .flat_map(|&a| nbrs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .filter(|&(a, b)| g.has_edge(a, b))
            .map(|(a, b)| Edge::new(a, b))
            .collect();
        for (i, e) in inner.iter().enumerate() {
            for f in &inner[i + 1..] {
                if e.meets(f) {
                    continue;
                }
                let joined = [e.u, e.v]
                    .iter()
                    .any(|&a| g.has_edge(a, f.u) || g.has_edge(a, f.v));
                if !joined {
                    hits.push(PatternHit {
                        kind: PatternKind::Butterfly,
                        vertices: vec![u, e.u, e.v, f.u, f.v],
                        forced_edges: vec![*e, *f],
                    });
                }
            }
        }
    }
    hits
}

/// First induced path on `k` vertices, found by depth-first extension.
pub fn find_induced_path(g: &Graph, k: usize) -> Option<PatternHit> {
    find_induced_path_within(g, k, &g.vertex_set())
}

pub fn find_induced_path_within(g: &Graph, k: usize, within: &VertexSet) -> Option<PatternHit> {
    if k == 0 {
        return None;
    }
    let mut path = Vec::with_capacity(k);
    // blocked[j]: vertices that may not extend a path of length j + 1
    let mut blocked: Vec<FixedBitSet> = Vec::with_capacity(k);
    for s in within.ones() {
        path.clear();
        blocked.clear();
        path.push(s);
        let mut b = FixedBitSet::with_capacity(g.n());
        b.insert(s);
        blocked.push(b);
        if extend_path(g, k, within, &mut path, &mut blocked) {
            return Some(PatternHit {
                kind: PatternKind::InducedPath(k),
                vertices: path,
                forced_edges: Vec::new(),
            });
        }
    }
    None
}

fn extend_path(
    g: &Graph,
    k: usize,
    within: &VertexSet,
    path: &mut Vec<Vertex>,
    blocked: &mut Vec<FixedBitSet>,
) -> bool {
    if path.len() == k {
        return true;
    }
    let tip = *path.last().expect("non-empty path");
    let mut candidates = g.row(tip).clone();
    candidates.intersect_with(within);
    candidates.difference_with(blocked.last().expect("blocked row per vertex"));
    for w in candidates.ones() {
        // A new vertex must avoid every path vertex except the tip and all
        // their neighbors; the tip's neighbors join the blocked set now.
        let mut next = blocked.last().expect("blocked row").clone();
        next.union_with(g.row(tip));
        next.insert(w);
        path.push(w);
        blocked.push(next);
        if extend_path(g, k, within, path, blocked) {
            return true;
        }
        path.pop();
        blocked.pop();
    }
    false
}

/// All induced cycles of length `3..=max_len` inside `within`, each once.
/// Cycles start at their smallest vertex and run towards the smaller of its
/// two cycle neighbors.
pub fn enumerate_short_induced_cycles(g: &Graph, within: &VertexSet, max_len: usize) -> Vec<PatternHit> {
    let mut out = Vec::new();
    visit_short_induced_cycles(g, within, max_len, usize::MAX, |cycle| {
        out.push(PatternHit {
            kind: PatternKind::InducedCycle(cycle.len()),
            vertices: cycle.to_vec(),
            forced_edges: Vec::new(),
        });
    });
    out
}

/// Calls `visit` for every induced cycle of length `3..=max_len` inside
/// `within`. Stops after `step_limit` extension steps and returns `false` in
/// that case.
pub fn visit_short_induced_cycles<F: FnMut(&[Vertex])>(
    g: &Graph,
    within: &VertexSet,
    max_len: usize,
    step_limit: usize,
    mut visit: F,
) -> bool {
    if max_len < 3 {
        return true;
    }
    let mut steps = 0usize;
    for s in within.ones() {
        // Only vertices above s may appear on a cycle rooted at s.
        let mut allowed = within.clone();
        allowed.set_range(..s + 1, false);
        let mut path = vec![s];
        let mut blocked = FixedBitSet::with_capacity(g.n());
        blocked.insert(s);
        let mut stack: Vec<(Vec<Vertex>, FixedBitSet)> = Vec::new();
        for &p1 in g.neighbors(s).iter().filter(|&&p1| allowed.contains(p1)) {
            path.truncate(1);
            path.push(p1);
            let mut b = blocked.clone();
            b.insert(p1);
            stack.push((path.clone(), b));
        }
        while let Some((path, blocked)) = stack.pop() {
            steps += 1;
            if steps > step_limit {
                return false;
            }
            let tip = *path.last().expect("path has a tip");
            let mut cand = g.row(tip).clone();
            cand.intersect_with(&allowed);
            cand.difference_with(&blocked);
            for w in cand.ones() {
                if g.has_edge(w, s) {
                    // w closes the cycle; it must not extend further.
                    if path.len() >= 2 && path[1] < w && path.len() < max_len {
                        let mut cycle = path.clone();
                        cycle.push(w);
                        visit(&cycle);
                    }
                    continue;
                }
                if path.len() + 1 < max_len {
                    let mut next_blocked = blocked.clone();
                    // interior vertices other than the tip forbid their neighbors
                    next_blocked.union_with(g.row(tip));
                    next_blocked.insert(w);
                    let mut next = path.clone();
                    next.push(w);
                    stack.push((next, next_blocked));
                }
            }
        }
    }
    true
}

/// True when `vertices` induce a path in the listed order.
pub fn is_induced_path(g: &Graph, vertices: &[Vertex]) -> bool {
    vertices.iter().enumerate().all(|(i, &a)| {
        vertices
            .iter()
            .enumerate()
            .skip(i + 1)
            .all(|(j, &b)| a != b && g.has_edge(a, b) == (j == i + 1))
    })
}

/// True when `vertices` induce a cycle in the listed order.
pub fn is_induced_cycle(g: &Graph, vertices: &[Vertex]) -> bool {
    let k = vertices.len();
    k >= 3
        && vertices.iter().enumerate().all(|(i, &a)| {
            vertices.iter().enumerate().skip(i + 1).all(|(j, &b)| {
                let consecutive = j == i + 1 || (i == 0 && j == k - 1);
                a != b && g.has_edge(a, b) == consecutive
            })
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Graph {
        // v1=0, v2=1, v3=2 path, u=3 joined to all
        Graph::from_edges(4, [(0, 1), (1, 2), (3, 0), (3, 1), (3, 2)]).unwrap()
    }

    fn butterfly() -> Graph {
        // v1 v2 = 0 1, v3 v4 = 2 3, u = 4
        Graph::from_edges(5, [(0, 1), (2, 3), (4, 0), (4, 1), (4, 2), (4, 3)]).unwrap()
    }

    #[test]
    fn k4_examples() {
        let hit = find_k4(&Graph::complete(4)).unwrap();
        assert_eq!(hit.vertices, vec![0, 1, 2, 3]);
        assert!(find_k4(&diamond()).is_none());
        assert!(find_k4(&Graph::cycle(9)).is_none());
    }

    #[test]
    fn diamond_mid_edge() {
        let hits = scan_forced_patterns(&diamond());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].kind, PatternKind::Diamond);
        assert_eq!(hits[0].forced_edges, vec![Edge::new(3, 1)]);
    }

    #[test]
    fn butterfly_peripheral_edges() {
        let hits = scan_forced_patterns(&butterfly());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].kind, PatternKind::Butterfly);
        assert_eq!(hits[0].forced_edges, vec![Edge::new(0, 1), Edge::new(2, 3)]);
        assert!(scan_forced_patterns(&Graph::cycle(6)).is_empty());
    }

    #[test]
    fn induced_paths() {
        let p9 = Graph::path(9);
        let hit = find_induced_path(&p9, 9).unwrap();
        assert!(is_induced_path(&p9, &hit.vertices));
        assert_eq!(hit.vertices.len(), 9);
        let c9 = Graph::cycle(9);
        assert!(find_induced_path(&c9, 9).is_none());
        let hit = find_induced_path(&c9, 8).unwrap();
        assert!(is_induced_path(&c9, &hit.vertices));
    }

    #[test]
    fn short_cycles() {
        let c6 = Graph::cycle(6);
        let cycles = enumerate_short_induced_cycles(&c6, &c6.vertex_set(), 9);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 1, 2, 3, 4, 5]);
        let p4 = Graph::path(4);
        assert!(enumerate_short_induced_cycles(&p4, &p4.vertex_set(), 9).is_empty());
        let two_triangles = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let cycles = enumerate_short_induced_cycles(&two_triangles, &two_triangles.vertex_set(), 9);
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().all(|c| c.kind == PatternKind::InducedCycle(3)));
    }

    #[test]
    fn cycle_length_cap() {
        let c7 = Graph::cycle(7);
        assert!(enumerate_short_induced_cycles(&c7, &c7.vertex_set(), 6).is_empty());
        assert_eq!(enumerate_short_induced_cycles(&c7, &c7.vertex_set(), 7).len(), 1);
    }
}
