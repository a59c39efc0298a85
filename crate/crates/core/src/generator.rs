//! Instance generators: planted solutions, filtered random graphs and the
//! exhaustive small-graph corpus.
//!
//! All randomness comes from a ChaCha8 stream seeded with the caller's seed,
//! so equal parameters give byte-identical graphs.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::coloring::Matching;
use crate::graph::{Edge, Graph, Vertex};
use crate::oracle::{oracle_dim, verify_dim};
use crate::patterns::{find_induced_path, find_k4, scan_forced_patterns};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("{0}")]
    Parameters(String),
    #[error("no graph passed the filters in {attempts} attempts")]
    Rejected { attempts: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum P9Status {
    Verified,
    Violated,
    Unchecked,
}

impl P9Status {
    pub fn of(g: &Graph) -> P9Status {
        if find_induced_path(g, 9).is_some() {
            P9Status::Violated
        } else {
            P9Status::Verified
        }
    }

    pub fn as_option(self) -> Option<bool> {
        match self {
            P9Status::Verified => Some(true),
            P9Status::Violated => Some(false),
            P9Status::Unchecked => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub planted: Matching,
    pub seed: u64,
    pub p9_free: P9Status,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantedParams {
    pub n: usize,
    /// Number of matched pairs.
    pub k: usize,
    /// White-black edges added on top of the matching.
    pub extra: usize,
    pub seed: u64,
    /// Add white-black edges until the graph is connected.
    pub connect: bool,
    pub check_p9: bool,
}

impl PlantedParams {
    pub fn new(n: usize, k: usize, extra: usize, seed: u64) -> Self {
        PlantedParams { n, k, extra, seed, connect: false, check_p9: false }
    }

    pub fn connected(mut self) -> Self {
        self.connect = true;
        self
    }

    pub fn with_p9_check(mut self) -> Self {
        self.check_p9 = true;
        self
    }
}

/// A graph with a known d.i.m.: `2k` black vertices paired into matching
/// edges, `n - 2k` white vertices, and only white-black edges besides.
pub fn gen_planted(p: PlantedParams) -> Result<PlantedInstance, GenError> {
    let PlantedParams { n, k, extra, seed, connect, check_p9 } = p;
    if 2 * k > n {
        return Err(GenError::Parameters(format!("2k = {} exceeds n = {n}", 2 * k)));
    }
    let whites = n - 2 * k;
    let capacity = whites * 2 * k;
    if extra > capacity {
        return Err(GenError::Parameters(format!(
            "{extra} extra edges requested but only {capacity} white-black pairs exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut label: Vec<Vertex> = (0..n).collect();
    label.shuffle(&mut rng);
    let black = &label[..2 * k];
    let white = &label[2 * k..];

    let mut edges: Vec<Edge> = (0..k).map(|i| Edge::new(black[2 * i], black[2 * i + 1])).collect();
    let planted = Matching::new(edges.clone()).expect("pairs are disjoint");
    for idx in sample(&mut rng, capacity, extra) {
        edges.push(Edge::new(white[idx / (2 * k)], black[idx % (2 * k)]));
    }
    let mut graph = Graph::from_edges(n, edges.iter().map(|e| (e.u, e.v))).expect("planted edges are simple");

    if connect && !graph.is_connected() {
        if (k == 0 && n > 1) || (whites == 0 && k > 1) {
            return Err(GenError::Parameters(format!(
                "cannot connect {n} vertices with {k} matched pairs using white-black edges"
            )));
        }
        let hub_white = white[0];
        let hub_black = black[0];
        if !graph.has_edge(hub_white, hub_black) {
            edges.push(Edge::new(hub_white, hub_black));
        }
        let g0 = Graph::from_edges(n, edges.iter().map(|e| (e.u, e.v))).expect("simple");
        let is_black: Vec<bool> = {
            let mut b = vec![false; n];
            for &v in black {
                b[v] = true;
            }
            b
        };
        for comp in g0.connected_components(&g0.vertex_set()) {
            if comp.contains(&hub_white) {
                continue;
            }
            match comp.iter().find(|&&v| is_black[v]) {
                Some(&b) => edges.push(Edge::new(hub_white, b)),
                None => edges.push(Edge::new(comp[0], hub_black)),
            }
        }
        graph = Graph::from_edges(n, edges.iter().map(|e| (e.u, e.v))).expect("simple");
    }

    assert!(
        verify_dim(&graph, &planted).is_ok_and(|v| v.is_valid()),
        "planted matching must be a d.i.m."
    );
    let p9_free = if check_p9 { P9Status::of(&graph) } else { P9Status::Unchecked };
    Ok(PlantedInstance { graph, planted, seed, p9_free })
}

/// A planted instance plus a 4-cycle joined to vertex 0 by one edge. No edge
/// of an induced 4-cycle can be matched, and the two cycle vertices away from
/// the joining edge then leave their cycle edge undominated, so the result
/// has no d.i.m.
pub fn gen_no_dim(p: PlantedParams) -> Result<Graph, GenError> {
    let inst = gen_planted(p)?;
    let g = &inst.graph;
    let n = g.n();
    let mut edges: Vec<(Vertex, Vertex)> = g.edges().map(|e| (e.u, e.v)).collect();
    // 4-cycle on n..n+3, joined to vertex 0
    edges.extend([(n, n + 1), (n + 1, n + 2), (n + 2, n + 3), (n + 3, n), (0, n)]);
    Graph::from_edges(n + 4, edges).map_err(|e| GenError::Parameters(e.to_string()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Filters {
    pub k4_free: bool,
    pub diamond_butterfly_free: bool,
    pub p9_free: bool,
}

impl Filters {
    pub fn accepts(&self, g: &Graph) -> bool {
        (!self.k4_free || find_k4(g).is_none())
            && (!self.diamond_butterfly_free || scan_forced_patterns(g).is_empty())
            && (!self.p9_free || find_induced_path(g, 9).is_none())
    }
}

/// Erdős–Rényi graph resampled until `filters` pass.
pub fn gen_random(n: usize, p: f64, seed: u64, filters: Filters, max_attempts: u64) -> Result<(Graph, u64), GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::Parameters(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_attempts {
        let g = random_graph(n, p, &mut rng);
        if filters.accepts(&g) {
            return Ok((g, attempt));
        }
    }
    Err(GenError::Rejected { attempts: max_attempts })
}

pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("random edges are simple")
}

/// Canonical adjacency code of a graph on at most 11 vertices: the smallest
/// upper-triangle bit string over all relabelings that respect iterated
/// degree refinement.
pub fn canonical_code(g: &Graph) -> u64 {
    let n = g.n();
    assert!(n <= 11, "canonical codes are limited to 11 vertices");
    let color = refine(g);
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by_key(|&v| (color[v], v));
    let mut cells: Vec<Vec<Vertex>> = Vec::new();
    for &v in &order {
        match cells.last_mut() {
            Some(cell) if color[cell[0]] == color[v] => cell.push(v),
            _ => cells.push(vec![v]),
        }
    }
    let mut best = u64::MAX;
    let mut perm = Vec::with_capacity(n);
    permute_cells(g, &cells, 0, &mut perm, &mut best);
    best
}

fn refine(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut color: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    loop {
        let mut sig: Vec<(usize, Vec<usize>, Vertex)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&w| color[w]).collect();
                nb.sort_unstable();
                (color[v], nb, v)
            })
            .collect();
        sig.sort();
        let mut next = vec![0; n];
        let mut rank = 0;
        for i in 0..n {
            if i > 0 && (sig[i].0 != sig[i - 1].0 || sig[i].1 != sig[i - 1].1) {
                rank += 1;
            }
            next[sig[i].2] = rank;
        }
        let classes = |c: &[usize]| c.iter().collect::<HashSet<_>>().len();
        if classes(&next) == classes(&color) {
            return next;
        }
        color = next;
    }
}

fn permute_cells(g: &Graph, cells: &[Vec<Vertex>], cell: usize, perm: &mut Vec<Vertex>, best: &mut u64) {
    if cell == cells.len() {
        let n = perm.len();
        let mut code = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                code = code << 1 | g.has_edge(perm[i], perm[j]) as u64;
            }
        }
        *best = (*best).min(code);
        return;
    }
    let mut members = cells[cell].clone();
    heap_permutations(&mut members, &mut |p| {
        let len = perm.len();
        perm.extend_from_slice(p);
        permute_cells(g, cells, cell + 1, perm, best);
        perm.truncate(len);
    });
}

fn heap_permutations(items: &mut [Vertex], f: &mut dyn FnMut(&[Vertex])) {
    fn go(k: usize, items: &mut [Vertex], f: &mut dyn FnMut(&[Vertex])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            go(k - 1, items, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        go(k - 1, items, f);
    }
    let k = items.len();
    go(k, items, f);
}

/// All graphs on `n` vertices up to isomorphism (connected or not), built by
/// adding one vertex at a time.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let mut layer = vec![Graph::empty(0)];
    for size in 1..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &layer {
            let base: Vec<(Vertex, Vertex)> = g.edges().map(|e| (e.u, e.v)).collect();
            for mask in 0u32..(1 << (size - 1)) {
                let mut edges = base.clone();
                edges.extend((0..size - 1).filter(|&v| mask >> v & 1 == 1).map(|v| (v, size - 1)));
                let h = Graph::from_edges(size, edges).expect("simple");
                if seen.insert(canonical_code(&h)) {
                    next.push(h);
                }
            }
        }
        layer = next;
    }
    layer
}

/// Connected graphs on `2..=max_n` vertices, up to isomorphism.
pub fn connected_graphs(max_n: usize) -> Vec<Graph> {
    (2..=max_n)
        .flat_map(all_graphs)
        .filter(|g| g.is_connected())
        .collect()
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub graph: Graph,
    pub label: Option<&'static str>,
    pub p9_free: P9Status,
    pub seed: Option<u64>,
}

impl CorpusEntry {
    pub fn manifest_line(&self, path: &str) -> String {
        json!({
            "path": path,
            "n": self.graph.n(),
            "m": self.graph.m(),
            "label": self.label,
            "p9_free": self.p9_free.as_option(),
            "seed": self.seed,
        })
        .to_string()
    }
}

/// Every connected graph on `2..=max_n` vertices, labeled by the oracle.
pub fn emit_small_corpus(max_n: usize) -> Vec<CorpusEntry> {
    connected_graphs(max_n)
        .into_iter()
        .map(|graph| {
            let report = oracle_dim(&graph, u64::MAX);
            let label = Some(if report.found.is_some() { "dim" } else { "no-dim" });
            let p9_free = if graph.n() < 9 { P9Status::Verified } else { P9Status::of(&graph) };
            CorpusEntry { graph, label, p9_free, seed: None }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_examples() {
        let inst = gen_planted(PlantedParams::new(4, 1, 2, 7)).unwrap();
        assert!(verify_dim(&inst.graph, &inst.planted).unwrap().is_valid());
        let k2 = gen_planted(PlantedParams::new(2, 1, 0, 0)).unwrap();
        assert_eq!(k2.graph, Graph::path(2));
        assert_eq!(k2.planted.edges(), &[Edge::new(0, 1)]);
        assert!(gen_planted(PlantedParams::new(3, 2, 0, 0)).is_err());
        assert!(gen_planted(PlantedParams::new(4, 1, 5, 0)).is_err());
    }

    #[test]
    fn planted_connectivity_and_determinism() {
        let p = PlantedParams::new(200, 40, 150, 3).connected();
        let a = gen_planted(p).unwrap();
        let b = gen_planted(p).unwrap();
        assert!(a.graph.is_connected());
        assert_eq!(a.graph.to_text(), b.graph.to_text());
        assert!(gen_planted(PlantedParams::new(3, 0, 0, 1).connected()).is_err());
    }

    #[test]
    fn random_examples() {
        let f = Filters { k4_free: true, ..Filters::default() };
        let (a, tries) = gen_random(10, 0.2, 5, f, 100).unwrap();
        assert!(tries >= 1);
        assert_eq!(a, gen_random(10, 0.2, 5, f, 100).unwrap().0);
        assert_eq!(gen_random(4, 1.0, 1, f, 5), Err(GenError::Rejected { attempts: 5 }));
        assert_eq!(gen_random(6, 0.0, 1, Filters::default(), 1).unwrap().0, Graph::empty(6));
    }

    #[test]
    fn graph_counts() {
        // numbers of graphs and connected graphs on n vertices
        let all = [1, 1, 2, 4, 11, 34, 156];
        for (n, &count) in all.iter().enumerate().skip(1) {
            assert_eq!(all_graphs(n).len(), count, "n = {n}");
        }
        let connected: Vec<usize> = (2..=6).map(|n| all_graphs(n).iter().filter(|g| g.is_connected()).count()).collect();
        assert_eq!(connected, vec![1, 2, 6, 21, 112]);
    }

    #[test]
    fn corpus_examples() {
        let small = emit_small_corpus(3);
        assert_eq!(small.len(), 3);
        assert!(small.iter().all(|e| e.label == Some("dim")));
        let four = emit_small_corpus(4);
        let c4 = four.iter().find(|e| canonical_code(&e.graph) == canonical_code(&Graph::cycle(4))).unwrap();
        assert_eq!(c4.label, Some("no-dim"));
        let five = emit_small_corpus(5);
        let c5 = five.iter().find(|e| canonical_code(&e.graph) == canonical_code(&Graph::cycle(5))).unwrap();
        assert_eq!(c5.label, Some("no-dim"));
    }
}
