//! Completing a partial coloring, one independent piece at a time.
//!
//! [`Completer`] is an exact search: it splits the undecided vertices into
//! connected pieces, which never constrain each other, and branches inside a
//! piece on the mate of a black vertex (or on the color of a vertex) with
//! propagation after every choice. The rules in this module only shrink the
//! search; the branching alone decides every instance.

use std::cmp::Reverse;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::coloring::{Color, Coloring, Contradiction, ContradictionKind};
use crate::decomposition::{Fact, Rule, XyDecomposition};
use crate::graph::{Edge, Graph, Vertex, VertexSet};
use crate::patterns::visit_short_induced_cycles;

/// Extension steps allowed per cycle enumeration.
const CYCLE_STEP_LIMIT: usize = 200_000;
/// Largest level-4 piece whose colorings are enumerated as seeds.
const MAX_SEEDED_PIECE: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Infeasible(Contradiction),
    BudgetExceeded,
}

impl From<Contradiction> for Failure {
    fn from(c: Contradiction) -> Self {
        Failure::Infeasible(c)
    }
}

pub type Seed = Vec<(Vertex, Color)>;

pub struct Completer<'g> {
    g: &'g Graph,
    limit: u64,
    pub branches: u64,
}

impl<'g> Completer<'g> {
    pub fn new(g: &'g Graph, limit: u64) -> Self {
        Completer { g, limit, branches: 0 }
    }

    /// Undecided vertices of `within`, split into connected pieces.
    pub fn open_pieces(&self, c: &Coloring, within: &[Vertex]) -> Vec<Vec<Vertex>> {
        let mut set = FixedBitSet::with_capacity(self.g.n());
        for &v in within {
            if c.is_open(v) {
                set.insert(v);
            }
        }
        self.g.connected_components(&set)
    }

    /// Colors every undecided vertex of `within`. `c` must be propagated.
    pub fn complete(&mut self, c: &mut Coloring, within: &[Vertex]) -> Result<(), Failure> {
        for piece in self.open_pieces(c, within) {
            self.solve_piece(c, &piece)?;
        }
        Ok(())
    }

    /// Like [`Completer::complete`] on one piece, trying `seeds` first. The
    /// seeds must cover every completion of the piece.
    pub fn complete_seeded(&mut self, c: &mut Coloring, piece: &[Vertex], seeds: &[Seed]) -> Result<(), Failure> {
        if seeds.is_empty() {
            self.complete(c, piece)
        } else {
            self.try_options(c, piece, seeds)
        }
    }

    fn solve_piece(&mut self, c: &mut Coloring, piece: &[Vertex]) -> Result<(), Failure> {
        let g = self.g;
        let waiting = piece
            .iter()
            .copied()
            .filter(|&v| c.is_black(v) && c.mate(v).is_none())
            .map(|v| (c.mate_candidates(g, v).len(), v))
            .min();
        let options: Vec<Seed> = match waiting {
            Some((_, v)) => c.mate_candidates(g, v).into_iter().map(|w| vec![(w, Color::Black)]).collect(),
            None => {
                let pick = piece
                    .iter()
                    .copied()
                    .filter(|&v| c.is_unknown(v))
                    .max_by_key(|&v| (g.degree(v), Reverse(v)));
                match pick {
                    Some(v) => vec![vec![(v, Color::White)], vec![(v, Color::Black)]],
                    None => return Ok(()),
                }
            }
        };
        self.try_options(c, piece, &options)
    }

    fn try_options(&mut self, c: &mut Coloring, piece: &[Vertex], options: &[Seed]) -> Result<(), Failure> {
        let mut last = None;
        for opt in options {
            self.branches += 1;
            if self.branches > self.limit {
                return Err(Failure::BudgetExceeded);
            }
            let mut next = c.clone();
            let applied = opt
                .iter()
                .try_for_each(|&(v, col)| next.assign_and_propagate(self.g, v, col))
                .map_err(Failure::from);
            match applied.and_then(|()| self.complete(&mut next, piece)) {
                Ok(()) => {
                    *c = next;
                    return Ok(());
                }
                Err(Failure::Infeasible(e)) => last = Some(e),
                Err(Failure::BudgetExceeded) => return Err(Failure::BudgetExceeded),
            }
        }
        let witness = piece.first().copied().into_iter().collect();
        Err(Failure::Infeasible(
            last.unwrap_or_else(|| Contradiction::new(ContradictionKind::NoMate, witness)),
        ))
    }
}

/// Cycle rules on the anchors plus level 3:
///
/// * an induced 6-cycle through one anchor has both vertices at distance two
///   from the anchor black;
/// * an induced 7-cycle through two anchors three apart has the middle vertex
///   of the longer arc black;
/// * an induced 9-cycle through two anchors four apart has the middle vertex
///   of the shorter arc black.
pub fn reduce_cycles(g: &Graph, d: &mut XyDecomposition) -> Result<bool, Contradiction> {
    let mut within = d.set_of_level(g.n(), 3);
    for &u in &d.anchors {
        within.insert(u);
    }
    within.intersect_with(&d.within);
    let mut forced: Vec<(Rule, Vertex)> = Vec::new();
    let is_anchor = |v: Vertex| d.in_level(v, 2);
    visit_short_induced_cycles(g, &within, 9, CYCLE_STEP_LIMIT, |cyc| {
        let k = cyc.len();
        let at: Vec<usize> = (0..k).filter(|&i| is_anchor(cyc[i])).collect();
        match (k, at.as_slice()) {
            (6, &[p]) => {
                forced.push((Rule::SixCycle, cyc[(p + 2) % 6]));
                forced.push((Rule::SixCycle, cyc[(p + 4) % 6]));
            }
            (7, &[p, q]) if q - p == 3 => forced.push((Rule::SevenCycle, cyc[(q + 2) % 7])),
            (7, &[p, q]) if q - p == 4 => forced.push((Rule::SevenCycle, cyc[p + 2])),
            (9, &[p, q]) if q - p == 4 => forced.push((Rule::NineCycle, cyc[p + 2])),
            (9, &[p, q]) if q - p == 5 => forced.push((Rule::NineCycle, cyc[(q + 2) % 9])),
            _ => {}
        }
    });
    let mut changed = false;
    for (rule, v) in forced {
        changed |= d.force(g, rule, Fact::Black(v))?;
    }
    Ok(changed)
}

fn open_level4_neighbors(g: &Graph, d: &XyDecomposition, v: Vertex) -> Vec<Vertex> {
    g.neighbors(v)
        .iter()
        .copied()
        .filter(|&w| d.in_level(w, 4) && !d.coloring.is_white(w))
        .collect()
}

/// Level-4 rules:
///
/// * a level-4 vertex without a non-white level-4 neighbor is white;
/// * an isolated edge among the non-white level-4 vertices is matched;
/// * an induced 5-cycle in levels 3 and 4 with exactly one edge inside level
///   4 has that edge matched;
///
/// and, when the graph is known to be P9-free,
///
/// * a 4-cycle of one level-3 vertex and three level-4 vertices has the
///   level-3 vertex black;
/// * a level-4 vertex with three or more undecided level-4 neighbors is white.
pub fn reduce_level4(g: &Graph, d: &mut XyDecomposition) -> Result<bool, Contradiction> {
    let mut changed = false;
    if d.levels[4].is_empty() {
        return Ok(false);
    }
    for v in d.levels[4].clone() {
        if !d.coloring.is_white(v) && open_level4_neighbors(g, d, v).is_empty() {
            changed |= d.force(g, Rule::IsolatedLevel4, Fact::White(v))?;
        }
    }
    for v in d.levels[4].clone() {
        if d.coloring.is_white(v) {
            continue;
        }
        if let [w] = open_level4_neighbors(g, d, v).as_slice() {
            if v < *w && open_level4_neighbors(g, d, *w).len() == 1 {
                changed |= d.force(g, Rule::Level4Edge, Fact::Edge(Edge::new(v, *w)))?;
            }
        }
    }

    let mut lower = d.set_of_level(g.n(), 3);
    lower.union_with(&d.set_of_level(g.n(), 4));
    let mut five: Vec<Edge> = Vec::new();
    let mut four: Vec<Vertex> = Vec::new();
    let p9 = d.p9_rules;
    let open_lower = {
        let mut s = lower.clone();
        for v in lower.ones() {
            if !d.coloring.is_open(v) {
                s.set(v, false);
            }
        }
        s
    };
    let deep = |v: Vertex| d.in_level(v, 4);
    visit_short_induced_cycles(g, &lower, 5, CYCLE_STEP_LIMIT, |cyc| {
        if cyc.len() != 5 {
            return;
        }
        let inner: Vec<Edge> = (0..5)
            .map(|i| (cyc[i], cyc[(i + 1) % 5]))
            .filter(|&(a, b)| deep(a) && deep(b))
            .map(|(a, b)| Edge::new(a, b))
            .collect();
        if let [e] = inner.as_slice() {
            five.push(*e);
        }
    });
    if p9 {
        visit_short_induced_cycles(g, &open_lower, 4, CYCLE_STEP_LIMIT, |cyc| {
            if cyc.len() != 4 {
                return;
            }
            let upper: Vec<Vertex> = cyc.iter().copied().filter(|&v| !deep(v)).collect();
            if let [t] = upper.as_slice() {
                four.push(*t);
            }
        });
    }
    for e in five {
        changed |= d.force(g, Rule::FiveCycle, Fact::Edge(e))?;
    }
    for t in four {
        changed |= d.force(g, Rule::FourCycle, Fact::Black(t))?;
    }
    if p9 {
        for v in d.levels[4].clone() {
            if !d.coloring.is_unknown(v) {
                continue;
            }
            let open = g
                .neighbors(v)
                .iter()
                .filter(|&&w| d.in_level(w, 4) && d.coloring.is_open(w))
                .count();
            if open >= 3 {
                changed |= d.force(g, Rule::Level4HighDegree, Fact::White(v))?;
            }
        }
    }
    Ok(changed)
}

/// Runs the family, cycle and level-4 rules until none fires.
pub fn reduce_all(g: &Graph, d: &mut XyDecomposition) -> Result<(), Contradiction> {
    loop {
        crate::decomposition::normalize_families(g, d)?;
        let mut changed = reduce_cycles(g, d)?;
        changed |= reduce_level4(g, d)?;
        if !changed {
            return Ok(());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level4Shape {
    Empty,
    Path(usize),
    Cycle(usize),
    /// More than one piece, or a piece of another shape.
    Unexpected(String),
}

/// Shape of the undecided part of level 4 once the rules are exhausted. In a
/// reduced P9-free instance it is a single path on 3 to 8 vertices or a
/// cycle of length 3, 6 or 9.
pub fn level4_shape(g: &Graph, d: &XyDecomposition) -> Level4Shape {
    let pieces = level4_pieces(g, d);
    match pieces.as_slice() {
        [] => Level4Shape::Empty,
        [piece] => {
            let k = piece.len();
            let degrees: Vec<usize> = piece
                .iter()
                .map(|&v| g.neighbors(v).iter().filter(|w| piece.binary_search(w).is_ok()).count())
                .collect();
            let edges = degrees.iter().sum::<usize>() / 2;
            let max = degrees.iter().copied().max().unwrap_or(0);
            if max <= 2 && edges + 1 == k && (3..=8).contains(&k) {
                Level4Shape::Path(k)
            } else if max == 2 && edges == k && [3, 6, 9].contains(&k) {
                Level4Shape::Cycle(k)
            } else {
                Level4Shape::Unexpected(format!("level-4 piece with {k} vertices and {edges} edges"))
            }
        }
        many => Level4Shape::Unexpected(format!("{} level-4 pieces", many.len())),
    }
}

fn level4_pieces(g: &Graph, d: &XyDecomposition) -> Vec<Vec<Vertex>> {
    let mut set = FixedBitSet::with_capacity(g.n());
    for &v in &d.levels[4] {
        if d.coloring.is_open(v) {
            set.insert(v);
        }
    }
    g.connected_components(&set)
}

/// Every locally feasible coloring of the undecided level-4 vertices inside
/// `piece`: whites independent and each black with exactly one black neighbor
/// among them. Level-4 vertices are matched inside level 4, so these cover all
/// completions. `None` when the level-4 part is too large to enumerate.
pub fn level4_seeds(g: &Graph, d: &XyDecomposition, piece: &[Vertex]) -> Option<Vec<Seed>> {
    let inside: VertexSet = {
        let mut s = FixedBitSet::with_capacity(g.n());
        for &v in piece {
            s.insert(v);
        }
        s
    };
    let part: Vec<Vertex> = level4_pieces(g, d)
        .into_iter()
        .filter(|p| p.iter().all(|&v| inside.contains(v)))
        .max_by_key(|p| p.len())?;
    if part.len() > MAX_SEEDED_PIECE {
        return None;
    }
    let k = part.len();
    let idx = |v: Vertex| part.binary_search(&v).ok();
    let nbrs: Vec<Vec<usize>> = part
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&w| idx(w)).collect())
        .collect();
    let mut seeds = Vec::new();
    for mask in 0u32..(1 << k) {
        let black = |i: usize| mask >> i & 1 == 1;
        let ok = (0..k).all(|i| {
            if d.coloring.is_black(part[i]) && !black(i) {
                return false;
            }
            let blacks = nbrs[i].iter().filter(|&&j| black(j)).count();
            if black(i) {
                blacks == 1
            } else {
                blacks == nbrs[i].len()
            }
        });
        if ok {
            seeds.push(
                (0..k)
                    .map(|i| (part[i], if black(i) { Color::Black } else { Color::White }))
                    .collect(),
            );
        }
    }
    Some(seeds)
}

/// One seed per candidate mate of a designated anchor in `piece`: the one
/// with the fewest candidates among those whose family has two out-vertices,
/// else the one with the fewest candidates.
pub fn family_seeds(g: &Graph, d: &XyDecomposition, piece: &[Vertex]) -> Vec<Seed> {
    let chosen = d
        .open_anchors()
        .filter(|&i| piece.binary_search(&d.anchors[i]).is_ok())
        .map(|i| {
            let open = d.open_members(i);
            let outs = open.iter().filter(|&&t| d.is_out_vertex(g, t)).count();
            (outs < 2, open.len(), i, open)
        })
        .filter(|(_, len, _, _)| *len >= 2)
        .min();
    match chosen {
        Some((_, _, _, open)) => open.into_iter().map(|t| vec![(t, Color::Black)]).collect(),
        None => Vec::new(),
    }
}
