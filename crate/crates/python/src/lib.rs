//! Python bindings: `import dimkit`.

use dimkit::generator::{gen_no_dim, gen_planted, gen_random, Filters, PlantedParams};
use dimkit::oracle::{count_dims, oracle_dim, verify_dim, Verdict};
use dimkit::patterns::{find_induced_path, find_k4, scan_forced_patterns};
use dimkit::{Edge, Matching, SolveConfig, SolveOutcome};
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

type PyEdge = (usize, usize);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn edge_list(edges: &[Edge]) -> Vec<PyEdge> {
    edges.iter().map(|e| (e.u, e.v)).collect()
}

/// An undirected simple graph on vertices `0..n`.
#[pyclass(name = "Graph", module = "dimkit", frozen)]
pub struct PyGraph {
    inner: dimkit::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges = Vec::new()))]
    fn new(n: usize, edges: Vec<PyEdge>) -> PyResult<Self> {
        dimkit::Graph::from_edges(n, edges).map(|inner| PyGraph { inner }).map_err(value_error)
    }

    /// Parses the "n m" header plus edge-line text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        dimkit::Graph::parse(text).map(|inner| PyGraph { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn path(n: usize) -> Self {
        PyGraph { inner: dimkit::Graph::path(n) }
    }

    #[staticmethod]
    fn cycle(n: usize) -> Self {
        PyGraph { inner: dimkit::Graph::cycle(n) }
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<PyEdge> {
        self.inner.edges().map(|e| (e.u, e.v)).collect()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.n() {
            return Err(PyIndexError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.inner.n() && v < self.inner.n() && self.inner.has_edge(u, v)
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Result of `solve`.
#[pyclass(name = "Outcome", module = "dimkit", frozen)]
pub struct PyOutcome {
    inner: SolveOutcome,
}

#[pymethods]
impl PyOutcome {
    /// "dim", "no-dim" or "inconclusive".
    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn matching(&self) -> Option<Vec<PyEdge>> {
        self.inner.matching.as_ref().map(|m| edge_list(m.edges()))
    }

    #[getter]
    fn reason(&self) -> Option<String> {
        self.inner.reason.clone()
    }

    #[getter]
    fn p9_checked(&self) -> bool {
        self.inner.p9_checked
    }

    #[getter]
    fn branches(&self) -> u64 {
        self.inner.stats.branches
    }

    #[getter]
    fn edges_tried(&self) -> u64 {
        self.inner.stats.edges_tried
    }

    /// The report in the CLI's `--json` format.
    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn __bool__(&self) -> bool {
        self.inner.matching.is_some()
    }

    fn __repr__(&self) -> String {
        format!("Outcome(status={:?})", self.inner.status.as_str())
    }
}

/// Decides whether `graph` has a dominating induced matching.
#[pyfunction]
#[pyo3(signature = (graph, check_p9 = false, branch_budget = None, seed_budget = None, oracle_max_n = 18))]
fn solve(
    py: Python<'_>,
    graph: &PyGraph,
    check_p9: bool,
    branch_budget: Option<u64>,
    seed_budget: Option<usize>,
    oracle_max_n: usize,
) -> PyOutcome {
    let cfg = SolveConfig {
        check_p9,
        branch_budget,
        seed_budget,
        fallback_oracle_max_n: oracle_max_n,
        timing: false,
    };
    let g = &graph.inner;
    let inner = py.detach(|| dimkit::solve(g, &cfg));
    PyOutcome { inner }
}

fn to_matching(edges: Vec<PyEdge>) -> PyResult<Matching> {
    let edges: Vec<Edge> = edges.into_iter().map(|(u, v)| Edge::new(u, v)).collect();
    Matching::new(edges).map_err(value_error)
}

/// Whether `matching` is a dominating induced matching of `graph`.
#[pyfunction]
fn verify(graph: &PyGraph, matching: Vec<PyEdge>) -> PyResult<bool> {
    let m = to_matching(matching)?;
    Ok(matches!(verify_dim(&graph.inner, &m).map_err(value_error)?, Verdict::Valid))
}

/// Exhaustive search: some d.i.m., or None. Raises when the node limit is hit.
#[pyfunction]
#[pyo3(signature = (graph, node_limit = None))]
fn oracle(py: Python<'_>, graph: &PyGraph, node_limit: Option<u64>) -> PyResult<Option<Vec<PyEdge>>> {
    let g = &graph.inner;
    let report = py.detach(|| oracle_dim(g, node_limit.unwrap_or(u64::MAX)));
    if report.found.is_none() && report.limit_hit {
        return Err(PyValueError::new_err("node limit reached"));
    }
    Ok(report.found.map(|m| edge_list(m.edges())))
}

/// Number of d.i.m.s, or None when the node limit is hit.
#[pyfunction]
#[pyo3(name = "count_dims", signature = (graph, node_limit = None))]
fn count(py: Python<'_>, graph: &PyGraph, node_limit: Option<u64>) -> Option<u64> {
    let g = &graph.inner;
    py.detach(|| count_dims(g, node_limit.unwrap_or(u64::MAX)).count)
}

/// A graph with a planted d.i.m., returned as `(graph, matching)`.
#[pyfunction]
#[pyo3(signature = (n, k, extra, seed, connected = false))]
fn planted(n: usize, k: usize, extra: usize, seed: u64, connected: bool) -> PyResult<(PyGraph, Vec<PyEdge>)> {
    let mut p = PlantedParams::new(n, k, extra, seed);
    if connected {
        p = p.connected();
    }
    let inst = gen_planted(p).map_err(value_error)?;
    Ok((PyGraph { inner: inst.graph }, edge_list(inst.planted.edges())))
}

/// A planted graph with a 4-cycle attached, which has no d.i.m.
#[pyfunction]
#[pyo3(signature = (n, k, extra, seed, connected = false))]
fn no_dim(n: usize, k: usize, extra: usize, seed: u64, connected: bool) -> PyResult<PyGraph> {
    let mut p = PlantedParams::new(n, k, extra, seed);
    if connected {
        p = p.connected();
    }
    gen_no_dim(p).map(|inner| PyGraph { inner }).map_err(value_error)
}

/// G(n, p) with optional class filters, by rejection sampling.
#[pyfunction]
#[pyo3(signature = (n, p, seed, k4_free = false, diamond_butterfly_free = false, p9_free = false, max_attempts = 10_000))]
fn random_graph(
    n: usize,
    p: f64,
    seed: u64,
    k4_free: bool,
    diamond_butterfly_free: bool,
    p9_free: bool,
    max_attempts: u64,
) -> PyResult<PyGraph> {
    let filters = Filters { k4_free, diamond_butterfly_free, p9_free };
    gen_random(n, p, seed, filters, max_attempts).map(|(inner, _)| PyGraph { inner }).map_err(value_error)
}

/// Vertices of some K4, or None.
#[pyfunction]
fn k4(graph: &PyGraph) -> Option<Vec<usize>> {
    find_k4(&graph.inner).map(|h| h.vertices)
}

/// Vertices of some induced path on `k` vertices, in order, or None.
#[pyfunction]
fn induced_path(graph: &PyGraph, k: usize) -> Option<Vec<usize>> {
    find_induced_path(&graph.inner, k).map(|h| h.vertices)
}

/// Edges forced into every d.i.m. by diamonds and butterflies.
#[pyfunction]
fn forced_edges(graph: &PyGraph) -> Vec<PyEdge> {
    let mut edges: Vec<PyEdge> = scan_forced_patterns(&graph.inner)
        .iter()
        .flat_map(|h| h.forced_edges.iter().map(|e| (e.u, e.v)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// The solver's decomposition trace as a JSON string.
#[pyfunction]
#[pyo3(signature = (graph, check_p9 = false))]
fn explain(graph: &PyGraph, check_p9: bool) -> String {
    let cfg = SolveConfig { check_p9, ..SolveConfig::default() };
    dimkit::driver::explain(&graph.inner, &cfg).to_string()
}

#[pymodule]
#[pyo3(name = "dimkit")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(planted, m)?)?;
    m.add_function(wrap_pyfunction!(no_dim, m)?)?;
    m.add_function(wrap_pyfunction!(random_graph, m)?)?;
    m.add_function(wrap_pyfunction!(k4, m)?)?;
    m.add_function(wrap_pyfunction!(induced_path, m)?)?;
    m.add_function(wrap_pyfunction!(forced_edges, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    Ok(())
}
