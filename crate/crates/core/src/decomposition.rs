//! Distance levels around a candidate matching edge `xy` and the forcing rules
//! that hold for every d.i.m. containing it.
//!
//! Level 1 is white, level 2 is black. Level-2 vertices with a level-2
//! neighbor are matched among themselves (`level2_edges`); the others are
//! `anchors`, each of which must be matched to one of its `families` member:
//! the level-3 vertices seeing no other level-2 vertex. Level-3 vertices seeing
//! two or more anchors are `shared` and white.
//!
//! A black level-3 vertex is always matched into level 2, so no matching edge
//! lies inside level 3 or between levels 3 and 4. The coloring carries that
//! restriction as a [`MateFilter`].

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::{Color, Coloring, Contradiction, ContradictionKind, MateFilter};
use crate::graph::{Edge, Graph, Vertex, VertexSet};

/// Largest level a decomposition may have.
pub const MAX_LEVEL: usize = 4;

const OUTSIDE: u8 = u8::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    RootEdge,
    Diamond,
    Butterfly,
    Level2Edge,
    Level4Triangle,
    OddLevel3Cycle,
    FamilyShape,
    SingletonFamily,
    SeesTwoOfFamily,
    ThreeFamilyEdges,
    FamilyEdgeWhitening,
    SixCycle,
    SevenCycle,
    NineCycle,
    IsolatedLevel4,
    Level4Edge,
    FiveCycle,
    FourCycle,
    Level4HighDegree,
}

impl Rule {
    /// Rules whose proofs use that the graph has no induced path on nine
    /// vertices; everything else holds in every graph.
    pub fn needs_p9_free(self) -> bool {
        matches!(self, Rule::FourCycle | Rule::Level4HighDegree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    Edge(Edge),
    White(Vertex),
    Black(Vertex),
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub rule: Rule,
    pub fact: Fact,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("{0} is not an edge")]
    NotAnEdge(Edge),
    #[error("vertex {vertex} is at distance {distance} from the root edge")]
    RadiusExceeded { vertex: Vertex, distance: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct XyDecomposition {
    pub x: Vertex,
    pub y: Vertex,
    /// `levels[i]` holds the vertices at distance `i` from `{x, y}`.
    pub levels: Vec<Vec<Vertex>>,
    pub level2_edges: Vec<Edge>,
    pub anchors: Vec<Vertex>,
    /// Private level-3 neighbors, one list per anchor.
    pub families: Vec<Vec<Vertex>>,
    pub shared: Vec<Vertex>,
    /// Family members without a level-3 or level-4 neighbor outside their
    /// own family.
    pub in_vertices: Vec<Vertex>,
    pub firings: Vec<Firing>,
    /// Whether rules that need a P9-free graph may fire.
    pub p9_rules: bool,
    /// Record conclusions that were already known as well.
    #[serde(skip)]
    pub audit: bool,
    #[serde(skip)]
    pub within: VertexSet,
    #[serde(skip)]
    pub level_of: Vec<u8>,
    #[serde(skip)]
    pub family_of: Vec<Option<usize>>,
    #[serde(skip)]
    pub coloring: Coloring,
}

fn excluded_mates(a: u8, b: u8) -> bool {
    (a == 3 && (b == 3 || b == 4)) || (a == 4 && b == 3)
}

/// Computes the levels of `xy` inside `within` and the static partition of
/// levels 2 and 3. `x` is the endpoint the edge was chosen at.
pub fn build_levels(
    g: &Graph,
    within: &VertexSet,
    xy: Edge,
    base: &Coloring,
) -> Result<XyDecomposition, DecompositionError> {
    if !g.has_edge(xy.u, xy.v) || !within.contains(xy.u) || !within.contains(xy.v) {
        return Err(DecompositionError::NotAnEdge(xy));
    }
    let lv = g.bfs_levels_within(&[xy.u, xy.v], within);
    if lv.depth() > MAX_LEVEL {
        let vertex = lv.levels[lv.depth()][0];
        return Err(DecompositionError::RadiusExceeded { vertex, distance: lv.depth() });
    }
    let mut levels = lv.levels;
    levels.resize(MAX_LEVEL + 1, Vec::new());
    let mut level_of = vec![OUTSIDE; g.n()];
    for (i, level) in levels.iter().enumerate() {
        for &v in level {
            level_of[v] = i as u8;
        }
    }

    let mut level2_edges = Vec::new();
    let mut anchors = Vec::new();
    for &v in &levels[2] {
        let mut isolated = true;
        for &w in g.neighbors(v) {
            if level_of[w] == 2 {
                isolated = false;
                if v < w {
                    level2_edges.push(Edge::new(v, w));
                }
            }
        }
        if isolated {
            anchors.push(v);
        }
    }
    let mut anchor_index = vec![usize::MAX; g.n()];
    for (i, &u) in anchors.iter().enumerate() {
        anchor_index[u] = i;
    }
    let mut families = vec![Vec::new(); anchors.len()];
    let mut family_of = vec![None; g.n()];
    let mut shared = Vec::new();
    for &v in &levels[3] {
        let up: Vec<Vertex> = g.neighbors(v).iter().copied().filter(|&w| level_of[w] == 2).collect();
        let anchor_count = up.iter().filter(|&&w| anchor_index[w] != usize::MAX).count();
        if up.len() == 1 && anchor_count == 1 {
            let i = anchor_index[up[0]];
            families[i].push(v);
            family_of[v] = Some(i);
        } else if anchor_count >= 2 {
            shared.push(v);
        }
    }
    let in_vertices = levels[3]
        .iter()
        .copied()
        .filter(|&v| {
            family_of[v].is_some_and(|i| {
                g.neighbors(v)
                    .iter()
                    .all(|&w| level_of[w] < 3 || level_of[w] == OUTSIDE || family_of[w] == Some(i))
            })
        })
        .collect();

    let mut coloring = base.clone();
    coloring.set_filter(Some(Arc::new(MateFilter::new(level_of.clone(), excluded_mates))));
    let (x, y) = (xy.u, xy.v);
    Ok(XyDecomposition {
        x,
        y,
        levels,
        level2_edges,
        anchors,
        families,
        shared,
        in_vertices,
        firings: Vec::new(),
        p9_rules: false,
        audit: false,
        within: within.clone(),
        level_of,
        family_of,
        coloring,
    })
}

impl XyDecomposition {
    pub fn root(&self) -> Edge {
        Edge::new(self.x, self.y)
    }

    pub fn level(&self, v: Vertex) -> Option<usize> {
        (self.level_of[v] != OUTSIDE).then_some(self.level_of[v] as usize)
    }

    pub fn in_level(&self, v: Vertex, i: usize) -> bool {
        self.level_of[v] as usize == i
    }

    pub fn set_of_level(&self, n: usize, i: usize) -> VertexSet {
        let mut s = FixedBitSet::with_capacity(n);
        for &v in &self.levels[i] {
            s.insert(v);
        }
        s
    }

    /// Applies a rule's conclusion, recording it when it changes anything.
    pub fn force(&mut self, g: &Graph, rule: Rule, fact: Fact) -> Result<bool, Contradiction> {
        let c = &mut self.coloring;
        let changed = match fact {
            Fact::Edge(e) => c.mate(e.u) != Some(e.v),
            Fact::White(v) => !c.is_white(v),
            Fact::Black(v) => !c.is_black(v),
            Fact::Infeasible => true,
        };
        if !changed {
            if self.audit && !self.firings.contains(&Firing { rule, fact }) {
                self.firings.push(Firing { rule, fact });
            }
            return Ok(false);
        }
        self.firings.push(Firing { rule, fact });
        match fact {
            Fact::Edge(e) => c.assign_edge(g, e)?,
            Fact::White(v) => c.assign_and_propagate(g, v, Color::White)?,
            Fact::Black(v) => c.assign_and_propagate(g, v, Color::Black)?,
            Fact::Infeasible => {
                return Err(Contradiction::new(ContradictionKind::Structure, vec![self.x, self.y]))
            }
        }
        Ok(true)
    }

    /// Anchors still waiting for a mate.
    pub fn open_anchors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.anchors.len()).filter(|&i| self.coloring.mate(self.anchors[i]).is_none())
    }

    /// Family members that can still become the anchor's mate.
    pub fn open_members(&self, i: usize) -> Vec<Vertex> {
        self.families[i].iter().copied().filter(|&t| self.coloring.is_unknown(t)).collect()
    }

    /// Whether `t` has a level-3 or level-4 neighbor outside its family.
    pub fn is_out_vertex(&self, g: &Graph, t: Vertex) -> bool {
        let fam = self.family_of[t];
        g.neighbors(t)
            .iter()
            .any(|&w| matches!(self.level_of[w], 3 | 4) && self.family_of[w] != fam)
    }
}

/// Makes `xy` a matching edge and applies the facts that follow directly:
/// level 1 white, level 2 black, level-2 edges matched, shared vertices white,
/// and level-4 edges forming a triangle with a level-3 vertex matched.
pub fn apply_initial_facts(g: &Graph, d: &mut XyDecomposition) -> Result<(), Contradiction> {
    d.force(g, Rule::RootEdge, Fact::Edge(d.root()))?;
    d.coloring.propagate_all(g)?;
    for &v in &d.levels[1] {
        if !d.coloring.is_white(v) {
            return Err(Contradiction::new(ContradictionKind::Structure, vec![v]));
        }
    }
    for e in d.level2_edges.clone() {
        d.force(g, Rule::Level2Edge, Fact::Edge(e))?;
    }
    for a in d.levels[3].clone() {
        let down: Vec<Vertex> = g.neighbors(a).iter().copied().filter(|&w| d.in_level(w, 4)).collect();
        for (i, &b) in down.iter().enumerate() {
            for &c in &down[i + 1..] {
                if g.has_edge(b, c) {
                    d.force(g, Rule::Level4Triangle, Fact::Edge(Edge::new(b, c)))?;
                }
            }
        }
    }
    // level 3 holds no matching edge, so every odd cycle there is undominated
    if !level3_bipartite(g, d) {
        d.force(g, Rule::OddLevel3Cycle, Fact::Infeasible)?;
    }
    // two disjoint edges in one family make a butterfly with the anchor
    for fam in &d.families {
        let inner: Vec<Edge> = fam
            .iter()
            .flat_map(|&a| fam.iter().filter(move |&&b| b > a && g.has_edge(a, b)).map(move |&b| Edge::new(a, b)))
            .collect();
        if max_disjoint(&inner, 2).len() == 2 {
            return d.force(g, Rule::FamilyShape, Fact::Infeasible).map(|_| ());
        }
    }
    Ok(())
}

fn level3_bipartite(g: &Graph, d: &XyDecomposition) -> bool {
    let mut side: Vec<Option<bool>> = vec![None; g.n()];
    for &s in &d.levels[3] {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            let here = side[v].unwrap();
            for &w in g.neighbors(v) {
                if !d.in_level(w, 3) {
                    continue;
                }
                match side[w] {
                    None => {
                        side[w] = Some(!here);
                        stack.push(w);
                    }
                    Some(other) if other == here => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// An induced P5 `(a, b, c, d, e)` among the family members of level 3
/// whose vertices after `a` all lie outside `a`'s family. P9-free graphs
/// have none once shared vertices are set aside.
pub fn special_p5(g: &Graph, d: &XyDecomposition) -> Option<Vec<Vertex>> {
    fn extend(g: &Graph, d: &XyDecomposition, fam: usize, path: &mut Vec<Vertex>) -> bool {
        if path.len() == 5 {
            return true;
        }
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            let ok = d.in_level(w, 3)
                && d.family_of[w].is_some_and(|j| j != fam)
                && !path.contains(&w)
                && path[..path.len() - 1].iter().all(|&p| !g.has_edge(p, w));
            if ok {
                path.push(w);
                if extend(g, d, fam, path) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    for &a in &d.levels[3] {
        let Some(fam) = d.family_of[a] else { continue };
        let mut path = vec![a];
        if extend(g, d, fam, &mut path) {
            return Some(path);
        }
    }
    None
}

/// A component of the anchors plus family members in which every level-3
/// edge is isolated (no other level-3 edge touches it) and which still has
/// four or more anchors. P9-free graphs have none.
pub fn crowded_isolated_component(g: &Graph, d: &XyDecomposition) -> Option<Vec<Vertex>> {
    let member = |v: Vertex| d.in_level(v, 3) && d.family_of[v].is_some();
    let mut set = FixedBitSet::with_capacity(g.n());
    for &v in d.anchors.iter().chain(&d.levels[3]) {
        if d.in_level(v, 2) || member(v) {
            set.insert(v);
        }
    }
    let inner_degree = |v: Vertex| g.neighbors(v).iter().filter(|&&w| member(w)).count();
    g.connected_components(&set).into_iter().find(|comp| {
        let all_isolated = comp.iter().filter(|&&v| member(v)).all(|&v| inner_degree(v) <= 1);
        let anchors = comp.iter().filter(|&&v| d.in_level(v, 2)).count();
        all_isolated && anchors >= 4
    })
}

/// Family rules, repeated until none fires:
///
/// * a family with one candidate left fixes the anchor's mate;
/// * a member seeing two members of another family is black;
/// * three disjoint edges between two families are infeasible;
/// * an edge inside a family, or two disjoint edges between two families,
///   confine each family's black vertex to those edges.
pub fn normalize_families(g: &Graph, d: &mut XyDecomposition) -> Result<(), Contradiction> {
    loop {
        let mut changed = false;
        for i in d.open_anchors().collect::<Vec<_>>() {
            let open = d.open_members(i);
            if open.len() == 1 {
                let u = d.anchors[i];
                changed |= d.force(g, Rule::SingletonFamily, Fact::Edge(Edge::new(u, open[0])))?;
            }
        }
        for t in d.levels[3].clone() {
            let Some(i) = d.family_of[t] else { continue };
            if !d.coloring.is_unknown(t) {
                continue;
            }
            let mut seen: Vec<usize> = Vec::new();
            let mut sees_two = false;
            for &w in g.neighbors(t) {
                if let Some(j) = d.family_of[w] {
                    if j != i {
                        if seen.contains(&j) {
                            sees_two = true;
                            break;
                        }
                        seen.push(j);
                    }
                }
            }
            if sees_two {
                changed |= d.force(g, Rule::SeesTwoOfFamily, Fact::Black(t))?;
            }
        }
        changed |= family_edge_rules(g, d)?;
        if !changed {
            return Ok(());
        }
    }
}

fn family_edge_rules(g: &Graph, d: &mut XyDecomposition) -> Result<bool, Contradiction> {
    let mut changed = false;
    let open: Vec<usize> = d.open_anchors().collect();
    for &i in &open {
        // an edge inside the family
        let fam = d.families[i].clone();
        let inner = fam
            .iter()
            .flat_map(|&a| fam.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .find(|&(a, b)| g.has_edge(a, b));
        if let Some((a, b)) = inner {
            for &t in &fam {
                if t != a && t != b {
                    changed |= d.force(g, Rule::FamilyEdgeWhitening, Fact::White(t))?;
                }
            }
        }
    }
    for (oi, &i) in open.iter().enumerate() {
        for &j in &open[oi + 1..] {
            let between: Vec<Edge> = d.families[i]
                .iter()
                .flat_map(|&a| g.neighbors(a).iter().map(move |&b| (a, b)))
                .filter(|&(_, b)| d.family_of[b] == Some(j))
                .map(|(a, b)| Edge::new(a, b))
                .collect();
            if between.len() < 2 {
                continue;
            }
            let disjoint = max_disjoint(&between, 3);
            if disjoint.len() >= 3 {
                d.force(g, Rule::ThreeFamilyEdges, Fact::Infeasible)?;
            }
            if disjoint.len() == 2 {
                let keep: Vec<Vertex> = disjoint.iter().flat_map(|e| [e.u, e.v]).collect();
                let members: Vec<Vertex> = d.families[i].iter().chain(&d.families[j]).copied().collect();
                for t in members {
                    if !keep.contains(&t) {
                        changed |= d.force(g, Rule::FamilyEdgeWhitening, Fact::White(t))?;
                    }
                }
            }
        }
    }
    Ok(changed)
}

/// Up to `cap` pairwise disjoint edges, as many as possible (augmenting
/// search; the lists are small).
fn max_disjoint(edges: &[Edge], cap: usize) -> Vec<Edge> {
    fn go(edges: &[Edge], from: usize, cap: usize, cur: &mut Vec<Edge>, best: &mut Vec<Edge>) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if best.len() >= cap {
            return;
        }
        for k in from..edges.len() {
            if cur.iter().all(|f| !f.meets(&edges[k])) {
                cur.push(edges[k]);
                go(edges, k + 1, cap, cur, best);
                cur.pop();
                if best.len() >= cap {
                    return;
                }
            }
        }
    }
    let mut best = Vec::new();
    go(edges, 0, cap, &mut Vec::new(), &mut best);
    best
}

/// Family members whose only neighbor is their anchor are interchangeable;
/// all but the smallest such candidate are made white. This keeps a solution
/// whenever one exists but is not implied by every solution.
pub fn prune_pendant_twins(g: &Graph, d: &mut XyDecomposition) -> Result<usize, Contradiction> {
    let mut pruned = 0;
    for i in d.open_anchors().collect::<Vec<_>>() {
        let twins: Vec<Vertex> = d.open_members(i).into_iter().filter(|&t| g.degree(t) == 1).collect();
        for &t in twins.iter().skip(1) {
            d.coloring.assign_and_propagate(g, t, Color::White)?;
            pruned += 1;
        }
    }
    Ok(pruned)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decompose(g: &Graph, x: Vertex, y: Vertex) -> Result<XyDecomposition, DecompositionError> {
        build_levels(g, &g.vertex_set(), Edge::new(x, y), &Coloring::new(g.n()))
    }

    #[test]
    fn isolated_edges_joining_four_families() {
        // anchors 6..=9 below level-1 vertices 2..=5; family of anchor 6 + i
        // is {10 + 2i, 11 + 2i}; isolated edges chain the families
        let mut edges = vec![(0, 1)];
        for i in 0..4 {
            edges.extend([(0, 2 + i), (2 + i, 6 + i), (6 + i, 10 + 2 * i), (6 + i, 11 + 2 * i)]);
        }
        let chain = [(11, 12), (13, 14), (15, 16)];
        let g = Graph::from_edges(18, edges.iter().chain(&chain).copied()).unwrap();
        let d = decompose(&g, 0, 1).unwrap();
        assert_eq!(d.anchors, vec![6, 7, 8, 9]);
        assert_eq!(special_p5(&g, &d), None);
        assert!(crowded_isolated_component(&g, &d).is_some());

        let g = Graph::from_edges(18, edges.iter().chain(&chain[..2]).copied()).unwrap();
        assert_eq!(crowded_isolated_component(&g, &decompose(&g, 0, 1).unwrap()), None);
    }

    #[test]
    fn path_levels() {
        let p7 = Graph::path(7);
        let d = decompose(&p7, 1, 2).unwrap();
        assert_eq!(d.levels[1], vec![0, 3]);
        assert_eq!(d.levels[2], vec![4]);
        assert_eq!(d.levels[3], vec![5]);
        assert_eq!(d.levels[4], vec![6]);
        assert_eq!(d.anchors, vec![4]);
        assert_eq!(d.families, vec![vec![5]]);
        assert!(matches!(
            decompose(&Graph::path(11), 0, 1),
            Err(DecompositionError::RadiusExceeded { distance: 9, .. })
        ));
    }

    #[test]
    fn cycle_levels() {
        let c6 = Graph::cycle(6);
        let mut d = decompose(&c6, 0, 1).unwrap();
        assert_eq!(d.levels[1], vec![2, 5]);
        assert_eq!(d.levels[2], vec![3, 4]);
        assert!(d.levels[3].is_empty() && d.levels[4].is_empty());
        assert_eq!(d.level2_edges, vec![Edge::new(3, 4)]);
        apply_initial_facts(&c6, &mut d).unwrap();
        assert!(d.coloring.is_complete_feasible(&c6));
    }

    #[test]
    fn path_initial_facts() {
        let p7 = Graph::path(7);
        let mut d = decompose(&p7, 1, 2).unwrap();
        apply_initial_facts(&p7, &mut d).unwrap();
        normalize_families(&p7, &mut d).unwrap();
        let c = &d.coloring;
        assert!(c.is_white(0) && c.is_white(3) && c.is_black(4));
        assert_eq!(c.mate(4), Some(5));
        assert!(c.is_complete_feasible(&p7));
    }

    #[test]
    fn empty_family_is_infeasible() {
        let p7 = Graph::path(7);
        let mut d = decompose(&p7, 2, 3).unwrap();
        assert!(apply_initial_facts(&p7, &mut d).is_err());
    }

    #[test]
    fn level4_triangle_forces_edge() {
        // x=0 y=1, 2 at level 1, 3 at level 2, 4 7 at level 3, 5 6 at level 4
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (4, 6), (5, 6)]).unwrap();
        let mut d = decompose(&g, 0, 1).unwrap();
        apply_initial_facts(&g, &mut d).unwrap();
        assert_eq!(d.coloring.mate(3), Some(7));
        assert!(d.firings.iter().any(|f| f.rule == Rule::Level4Triangle && f.fact == Fact::Edge(Edge::new(5, 6))));
    }

    #[test]
    fn pendant_twins_keep_one() {
        // anchor 3 with three pendant members 4 5 6
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (3, 5), (3, 6)]).unwrap();
        let mut d = decompose(&g, 0, 1).unwrap();
        apply_initial_facts(&g, &mut d).unwrap();
        assert_eq!(d.families[0], vec![4, 5, 6]);
        assert_eq!(d.in_vertices, vec![4, 5, 6]);
        assert_eq!(prune_pendant_twins(&g, &mut d).unwrap(), 2);
        normalize_families(&g, &mut d).unwrap();
        assert_eq!(d.coloring.mate(3), Some(4));
    }

    #[test]
    fn disjoint_search() {
        let e = |a, b| Edge::new(a, b);
        assert_eq!(max_disjoint(&[e(0, 1), e(1, 2), e(2, 3)], 3).len(), 2);
        assert_eq!(max_disjoint(&[e(0, 5), e(1, 6), e(2, 7), e(0, 6)], 3).len(), 3);
    }
}
