//! The solver: global preprocessing, the loop over central vertices, and
//! certificate assembly.
//!
//! Each round takes an undecided connected piece, picks a central vertex `x`
//! and tries every edge `xy` at it as a matching edge. If one leads to a
//! completion the piece is done; if all fail, `x` is white, its neighbors turn
//! black, and the remaining undecided vertices are split again. Pieces whose
//! central vertex has eccentricity above four (impossible in P9-free graphs)
//! are handed directly to the exact search.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use serde_json::json;

use crate::coloring::{Color, Coloring, Matching};
use crate::component::{family_seeds, level4_seeds, level4_shape, reduce_all, Completer, Failure, Level4Shape, Seed};
use crate::decomposition::{
    apply_initial_facts, build_levels, prune_pendant_twins, DecompositionError, Fact, Firing, Rule,
    XyDecomposition, MAX_LEVEL,
};
use crate::graph::{Edge, Graph, Vertex, VertexSet};
use crate::oracle::{oracle_dim, verify_dim};
use crate::patterns::{find_induced_path, find_k4, scan_forced_patterns};

/// Node limit for the exhaustive fallback.
const FALLBACK_ORACLE_NODES: u64 = 50_000_000;
/// Above this size the search runs on a thread with a large stack.
const DEEP_STACK_MIN_N: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    /// Search for an induced P9 first; without one the P9-only rules apply.
    pub check_p9: bool,
    /// Branches per search; `None` means `max(n², 256)`.
    pub branch_budget: Option<u64>,
    /// Seeds per piece; `None` means `max(3, largest family)`.
    pub seed_budget: Option<usize>,
    /// Inconclusive results on at most this many vertices go to the oracle.
    pub fallback_oracle_max_n: usize,
    /// Whether `stats.millis` is filled in. Off keeps reports reproducible.
    pub timing: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            check_p9: false,
            branch_budget: None,
            seed_budget: None,
            fallback_oracle_max_n: 18,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Dim,
    NoDim,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Dim => "dim",
            Status::NoDim => "no-dim",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub edges_tried: u64,
    pub forced_edges: u64,
    pub branches: u64,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: Status,
    pub matching: Option<Matching>,
    pub reason: Option<String>,
    pub stats: SolveStats,
    pub p9_checked: bool,
    /// `Some` when P9-freeness is known, either by the check or because the
    /// graph has fewer than nine vertices.
    pub p9_free: Option<bool>,
}

impl SolveOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        let matching: Vec<[Vertex; 2]> = self
            .matching
            .iter()
            .flat_map(|m| m.edges().iter().map(|e| [e.u, e.v]))
            .collect();
        json!({
            "status": self.status.as_str(),
            "matching": matching,
            "reason": self.reason,
            "stats": {
                "edges_tried": self.stats.edges_tried,
                "forced_edges": self.stats.forced_edges,
                "branches": self.stats.branches,
                "millis": self.stats.millis,
            },
            "p9_checked": self.p9_checked,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("report serializes")
    }
}

/// A single-edge d.i.m. (or the empty one for an edgeless graph).
pub fn trivial_dim(g: &Graph) -> Option<Matching> {
    if g.m() == 0 {
        return Some(Matching::empty());
    }
    let all: Vec<Vertex> = (0..g.n()).collect();
    single_edge_dim(g, &all).map(|e| Matching::new(vec![e]).expect("one edge"))
}

/// First edge `e` of the piece such that every edge of the piece meets `e`.
fn single_edge_dim(g: &Graph, piece: &[Vertex]) -> Option<Edge> {
    let twice: usize = piece.iter().map(|&v| g.degree(v)).sum();
    let m = twice / 2;
    piece
        .iter()
        .flat_map(|&u| g.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| Edge::new(u, v)))
        .find(|e| g.degree(e.u) + g.degree(e.v) - 1 == m)
}

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub coloring: Coloring,
    pub forced: Vec<Edge>,
}

/// K4 check plus the edges forced by diamonds and butterflies, propagated.
pub fn preprocess_global(g: &Graph) -> Result<Preprocessed, String> {
    if let Some(hit) = find_k4(g) {
        return Err(format!("contains K4 on {:?}", hit.vertices));
    }
    let mut coloring = Coloring::new(g.n());
    let mut forced = Vec::new();
    for hit in scan_forced_patterns(g) {
        for e in hit.forced_edges {
            if coloring.mate(e.u) == Some(e.v) {
                continue;
            }
            coloring
                .assign_edge(g, e)
                .map_err(|c| format!("{:?} forcing of {e} contradicts: {c}", hit.kind))?;
            forced.push(e);
        }
    }
    Ok(Preprocessed { coloring, forced })
}

/// Checks a Dim outcome's certificate.
pub fn verify_outcome(g: &Graph, out: &SolveOutcome) -> bool {
    out.status == Status::Dim
        && out
            .matching
            .as_ref()
            .is_some_and(|m| verify_dim(g, m).is_ok_and(|v| v.is_valid()))
}

/// What happened to one candidate edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeResult {
    Matched,
    Infeasible(String),
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeTrial {
    pub edge: Edge,
    pub result: EdgeResult,
    pub p9_rules: bool,
    pub level4: Option<Level4Shape>,
    pub pruned_twins: usize,
    pub firings: Vec<Firing>,
    pub decomposition: Option<XyDecomposition>,
}

enum Stop {
    NoDim(String),
    Inconclusive(String),
}

struct Solver<'g> {
    g: &'g Graph,
    cfg: &'g SolveConfig,
    p9_free: bool,
    branch_limit: u64,
    stats: SolveStats,
    keep_trials: bool,
    audit: bool,
    trials: Vec<EdgeTrial>,
}

impl<'g> Solver<'g> {
    fn new(g: &'g Graph, cfg: &'g SolveConfig, p9_free: bool) -> Self {
        let n = g.n() as u64;
        Solver {
            g,
            cfg,
            p9_free,
            branch_limit: cfg.branch_budget.unwrap_or((n * n).max(256)),
            stats: SolveStats::default(),
            keep_trials: false,
            audit: false,
            trials: Vec::new(),
        }
    }

    fn completer(&self) -> Completer<'g> {
        Completer::new(self.g, self.branch_limit)
    }

    fn run(&mut self) -> Result<Coloring, Stop> {
        let g = self.g;
        if let Some(m) = trivial_dim(g) {
            return Ok(Coloring::from_matching(g, &m));
        }
        let pre = preprocess_global(g).map_err(Stop::NoDim)?;
        self.stats.forced_edges += pre.forced.len() as u64;
        let mut c = pre.coloring;
        // components of the graph with a one-edge solution
        for comp in g.connected_components(&g.vertex_set()) {
            if comp.iter().any(|&v| !c.is_unknown(v)) {
                continue;
            }
            if let Some(e) = single_edge_dim(g, &comp) {
                c.assign_edge(g, e).map_err(|x| Stop::NoDim(x.to_string()))?;
            }
        }
        let all: Vec<Vertex> = (0..g.n()).collect();
        let mut stack = Completer::new(g, 0).open_pieces(&c, &all);
        stack.reverse();
        while let Some(piece) = stack.pop() {
            if piece.len() == 1 {
                let mut k = self.completer();
                let r = k.complete(&mut c, &piece);
                self.stats.branches += k.branches;
                self.settle(r)?;
                continue;
            }
            let set = set_of(g.n(), &piece);
            let (x, ecc) = g.central_vertex_within(&set).expect("pieces are connected");
            if ecc > MAX_LEVEL {
                self.generic(&mut c, &piece)?;
                continue;
            }
            match self.at_central_vertex(&c, &set, &piece, x) {
                Central::Solved(done) => c = done,
                Central::Budget => self.generic(&mut c, &piece)?,
                Central::Whiten => {
                    c.assign_and_propagate(g, x, Color::White)
                        .map_err(|e| Stop::NoDim(format!("vertex {x} has no matching edge: {e}")))?;
                    let mut rest = Completer::new(g, 0).open_pieces(&c, &piece);
                    rest.reverse();
                    stack.extend(rest);
                }
            }
        }
        Ok(c)
    }

    fn settle(&self, r: Result<(), Failure>) -> Result<(), Stop> {
        match r {
            Ok(()) => Ok(()),
            Err(Failure::Infeasible(e)) => Err(Stop::NoDim(format!("search exhausted: {e}"))),
            Err(Failure::BudgetExceeded) => Err(Stop::Inconclusive(format!(
                "branch budget of {} exceeded",
                self.branch_limit
            ))),
        }
    }

    fn generic(&mut self, c: &mut Coloring, piece: &[Vertex]) -> Result<(), Stop> {
        let mut k = self.completer();
        let r = k.complete(c, piece);
        self.stats.branches += k.branches;
        self.settle(r)
    }

    fn at_central_vertex(&mut self, c: &Coloring, set: &VertexSet, piece: &[Vertex], x: Vertex) -> Central {
        let g = self.g;
        let mut budget_hit = false;
        if c.is_white(x) {
            return Central::Whiten;
        }
        for &y in g.neighbors(x) {
            if !set.contains(y) || !c.is_open(y) {
                continue;
            }
            self.stats.edges_tried += 1;
            let (result, done) = self.try_edge(c, set, piece, x, y);
            match result {
                EdgeResult::Matched => return Central::Solved(done.expect("matched edge has a coloring")),
                EdgeResult::Infeasible(_) => {}
                EdgeResult::BudgetExceeded => budget_hit = true,
            }
        }
        if budget_hit {
            Central::Budget
        } else {
            Central::Whiten
        }
    }

    /// Tries `xy` as a matching edge of the piece; returns the completed
    /// coloring on success.
    fn try_edge(
        &mut self,
        base: &Coloring,
        set: &VertexSet,
        piece: &[Vertex],
        x: Vertex,
        y: Vertex,
    ) -> (EdgeResult, Option<Coloring>) {
        let g = self.g;
        let xy = Edge::new(x, y);
        let mut d = match build_levels(g, set, xy, base) {
            Ok(d) => d,
            Err(DecompositionError::RadiusExceeded { .. }) => {
                let mut c = base.clone();
                let mut k = self.completer();
                let r = c.assign_edge(g, xy).map_err(Failure::from).and_then(|()| k.complete(&mut c, piece));
                self.stats.branches += k.branches;
                return match r {
                    Ok(()) => (EdgeResult::Matched, Some(c)),
                    Err(Failure::Infeasible(e)) => (EdgeResult::Infeasible(e.to_string()), None),
                    Err(Failure::BudgetExceeded) => (EdgeResult::BudgetExceeded, None),
                };
            }
            Err(e) => return (EdgeResult::Infeasible(e.to_string()), None),
        };
        d.p9_rules = self.p9_free && in_p3(g, set, x, y);
        d.audit = self.audit;
        let mut trial = EdgeTrial {
            edge: xy,
            result: EdgeResult::BudgetExceeded,
            p9_rules: d.p9_rules,
            level4: None,
            pruned_twins: 0,
            firings: Vec::new(),
            decomposition: None,
        };
        let outcome = self.decide_edge(&mut d, piece, &mut trial);
        self.stats.forced_edges += d.firings.iter().filter(|f| matches!(f.fact, Fact::Edge(_))).count() as u64;
        trial.result = match &outcome {
            Ok(()) => EdgeResult::Matched,
            Err(Failure::Infeasible(e)) => EdgeResult::Infeasible(e.to_string()),
            Err(Failure::BudgetExceeded) => EdgeResult::BudgetExceeded,
        };
        let result = trial.result.clone();
        let mut done = None;
        if outcome.is_ok() {
            let mut c = d.coloring.clone();
            c.set_filter(None);
            done = Some(c);
        }
        if self.keep_trials {
            trial.firings = d.firings.clone();
            trial.decomposition = Some(d);
            self.trials.push(trial);
        }
        (result, done)
    }

    fn decide_edge(&mut self, d: &mut XyDecomposition, piece: &[Vertex], trial: &mut EdgeTrial) -> Result<(), Failure> {
        let g = self.g;
        apply_initial_facts(g, d)?;
        reduce_all(g, d)?;
        if d.p9_rules && !d.levels[4].is_empty() {
            trial.level4 = Some(level4_shape(g, d));
        }
        trial.pruned_twins = prune_pendant_twins(g, d)?;
        let seed_budget = self
            .cfg
            .seed_budget
            .unwrap_or_else(|| d.families.iter().map(Vec::len).max().unwrap_or(0).max(3));
        let mut k = self.completer();
        let mut result = Ok(());
        for part in k.open_pieces(&d.coloring, piece) {
            let mut seeds: Vec<Seed> = Vec::new();
            if part.iter().any(|&v| d.in_level(v, 4)) {
                seeds = level4_seeds(g, d, &part).unwrap_or_default();
            }
            if seeds.is_empty() {
                seeds = family_seeds(g, d, &part);
            }
            if seeds.len() > seed_budget {
                seeds.clear();
            }
            let mut c = d.coloring.clone();
            result = k.complete_seeded(&mut c, &part, &seeds);
            if result.is_err() {
                break;
            }
            d.coloring = c;
        }
        self.stats.branches += k.branches;
        result
    }
}

enum Central {
    Solved(Coloring),
    Whiten,
    Budget,
}

fn set_of(n: usize, vertices: &[Vertex]) -> VertexSet {
    let mut s = FixedBitSet::with_capacity(n);
    for &v in vertices {
        s.insert(v);
    }
    s
}

/// Whether some vertex of `set` sees exactly one of `x`, `y`.
fn in_p3(g: &Graph, set: &VertexSet, x: Vertex, y: Vertex) -> bool {
    let only = |a: Vertex, b: Vertex| g.neighbors(a).iter().any(|&z| z != b && set.contains(z) && !g.has_edge(z, b));
    only(x, y) || only(y, x)
}

fn p9_status(g: &Graph, cfg: &SolveConfig) -> Option<bool> {
    if g.n() < 9 {
        Some(true)
    } else if cfg.check_p9 {
        Some(find_induced_path(g, 9).is_none())
    } else {
        None
    }
}

fn run_deep<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    if n < DEEP_STACK_MIN_N {
        return f();
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(64 << 20 | (n << 14))
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

/// Decides whether `g` has a d.i.m. A `Dim` outcome always carries a verified
/// matching.
pub fn solve(g: &Graph, cfg: &SolveConfig) -> SolveOutcome {
    let start = Instant::now();
    let p9_free = p9_status(g, cfg);
    let (result, mut stats) = run_deep(g.n(), || {
        let mut s = Solver::new(g, cfg, p9_free == Some(true));
        let r = s.run();
        (r, s.stats)
    });
    let mut out = SolveOutcome {
        status: Status::Inconclusive,
        matching: None,
        reason: None,
        stats: SolveStats::default(),
        p9_checked: cfg.check_p9,
        p9_free,
    };
    match result {
        Ok(c) => match c.extract_matching(g) {
            Ok(mut m) if verify_dim(g, &m).is_ok_and(|v| v.is_valid()) => {
                m.mark_certified();
                out.status = Status::Dim;
                out.matching = Some(m);
            }
            _ => out.reason = Some("internal error: completed coloring failed verification".into()),
        },
        Err(Stop::NoDim(reason)) => {
            out.status = Status::NoDim;
            out.reason = Some(reason);
        }
        Err(Stop::Inconclusive(reason)) => out.reason = Some(reason),
    }
    if out.status == Status::Inconclusive && g.n() <= cfg.fallback_oracle_max_n {
        let report = oracle_dim(g, FALLBACK_ORACLE_NODES);
        if !report.limit_hit {
            let why = out.reason.take().unwrap_or_default();
            match report.found {
                Some(m) => {
                    out.status = Status::Dim;
                    out.matching = Some(m);
                    out.reason = Some(format!("decided by exhaustive search after: {why}"));
                }
                None => {
                    out.status = Status::NoDim;
                    out.reason = Some(format!("exhaustive search found none after: {why}"));
                }
            }
        }
    }
    if cfg.timing {
        stats.millis = start.elapsed().as_millis() as u64;
    }
    out.stats = stats;
    out
}

/// What the solver does at the central vertex of the first undecided piece.
#[derive(Debug, Serialize)]
pub struct Explanation {
    /// "ok", or why preprocessing already decided the instance.
    pub preprocess: String,
    pub forced_edges: Vec<Edge>,
    pub central_vertex: Option<Vertex>,
    pub eccentricity: Option<usize>,
    pub p9_free: Option<bool>,
    pub trials: Vec<EdgeTrial>,
}

/// Decomposition and outcome for every edge at the central vertex of the
/// first undecided piece.
pub fn explain_trials(g: &Graph, cfg: &SolveConfig) -> Explanation {
    let p9_free = p9_status(g, cfg);
    let mut out = Explanation {
        preprocess: "ok".to_string(),
        forced_edges: Vec::new(),
        central_vertex: None,
        eccentricity: None,
        p9_free,
        trials: Vec::new(),
    };
    let pre = match preprocess_global(g) {
        Ok(p) => p,
        Err(reason) => {
            out.preprocess = reason;
            return out;
        }
    };
    out.forced_edges = pre.forced.clone();
    let all: Vec<Vertex> = (0..g.n()).collect();
    let piece = Completer::new(g, 0)
        .open_pieces(&pre.coloring, &all)
        .into_iter()
        .find(|p| p.len() > 1);
    let Some(piece) = piece else {
        return out;
    };
    let set = set_of(g.n(), &piece);
    let (x, ecc) = g.central_vertex_within(&set).expect("connected piece");
    out.central_vertex = Some(x);
    out.eccentricity = Some(ecc);
    let mut s = Solver::new(g, cfg, p9_free == Some(true));
    s.keep_trials = true;
    for &y in g.neighbors(x) {
        if set.contains(y) && pre.coloring.is_open(y) && pre.coloring.is_open(x) {
            s.try_edge(&pre.coloring, &set, &piece, x, y);
        }
    }
    out.trials = s.trials;
    out
}

/// [`explain_trials`] as JSON.
pub fn explain(g: &Graph, cfg: &SolveConfig) -> serde_json::Value {
    serde_json::to_value(explain_trials(g, cfg)).expect("explanation serializes")
}

/// Every rule conclusion reached while trying each edge of each connected
/// component, with all budgets unlimited. Used to check that rule
/// conclusions hold in every d.i.m. containing the edge.
pub fn rule_firings(g: &Graph, p9_free: bool) -> Vec<(Edge, Vec<Firing>)> {
    let cfg = SolveConfig { branch_budget: Some(u64::MAX), ..SolveConfig::default() };
    let mut s = Solver::new(g, &cfg, p9_free);
    s.keep_trials = true;
    s.audit = true;
    let base = Coloring::new(g.n());
    for comp in g.connected_components(&g.vertex_set()) {
        if comp.len() < 2 {
            continue;
        }
        let set = set_of(g.n(), &comp);
        for x in comp.iter().copied() {
            for &y in g.neighbors(x) {
                if x < y {
                    s.try_edge(&base, &set, &comp, x, y);
                }
            }
        }
    }
    s.trials.into_iter().map(|t| (t.edge, t.firings)).collect()
}

/// Rules applied during global preprocessing, as firings.
pub fn preprocess_firings(g: &Graph) -> Vec<Firing> {
    scan_forced_patterns(g)
        .into_iter()
        .flat_map(|hit| {
            let rule = match hit.kind {
                crate::patterns::PatternKind::Diamond => Rule::Diamond,
                _ => Rule::Butterfly,
            };
            hit.forced_edges.into_iter().map(move |e| Firing { rule, fact: Fact::Edge(e) })
        })
        .collect()
}
