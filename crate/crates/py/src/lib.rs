//! Python bindings: graphs, the exact oracles, the matching and completion
//! primitives, and the four pipelines.

use hamcycles::flow::{complete_to_r_factor, RFactorInstance};
use hamcycles::graph::{io, sample_bipartite, sample_dnp};
use hamcycles::hamilton::{self, HamOutcome, SolverBudget};
use hamcycles::matching;
use hamcycles::pipelines::{self, PolicyOptions, Task};
use hamcycles::pseudorandom::{self, CheckBudget};
use hamcycles::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(hamcycles, RefusedError, PyException, "The parameter policy declined this density.");
create_exception!(hamcycles, InfeasibleError, PyException, "An r-factor completion does not exist.");

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Refused(m) => RefusedError::new_err(m),
        e @ Error::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        e @ (Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::SizeLimit { .. } | Error::Parse { .. }) => {
            PyValueError::new_err(e.to_string())
        }
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyclass(name = "Digraph", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDigraph(hamcycles::Digraph);

#[pymethods]
impl PyDigraph {
    #[new]
    fn new(n: usize) -> Self {
        PyDigraph(hamcycles::Digraph::empty(n))
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        PyDigraph(hamcycles::Digraph::complete(n))
    }

    /// A sample of D(n, p); the same seed gives the same digraph.
    #[staticmethod]
    #[pyo3(signature = (n, p, seed=0))]
    fn sample(n: usize, p: f64, seed: u64) -> PyResult<Self> {
        sample_dnp(n, p, seed).map(PyDigraph).map_err(py_err)
    }

    #[staticmethod]
    fn from_arcs(n: usize, arcs: Vec<(usize, usize)>) -> PyResult<Self> {
        hamcycles::Digraph::from_arcs(n, arcs).map(PyDigraph).map_err(py_err)
    }

    /// Reads the text or binary format.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        io::read_any(std::io::BufReader::new(f)).map(PyDigraph).map_err(py_err)
    }

    fn write_text(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        io::write_text(&self.0, f).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn add_arc(&mut self, u: usize, v: usize) -> PyResult<bool> {
        if u >= self.0.n() || v >= self.0.n() || u == v {
            return Err(PyValueError::new_err(format!("no arc ({u}, {v}) on {} vertices", self.0.n())));
        }
        Ok(self.0.add_arc(u, v))
    }

    fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.0.n() && v < self.0.n() && self.0.has_arc(u, v)
    }

    fn arcs(&self) -> Vec<(usize, usize)> {
        self.0.arcs().collect()
    }

    fn out_degree(&self, v: usize) -> usize {
        self.0.out_degree(v)
    }

    fn in_degree(&self, v: usize) -> usize {
        self.0.in_degree(v)
    }

    /// Whether `order` is a Hamilton cycle of this digraph.
    fn is_hamilton_cycle(&self, order: Vec<usize>) -> bool {
        hamcycles::graph::verify_cycle(&self.0, &hamcycles::HamCycle::new(order))
    }

    fn __repr__(&self) -> String {
        format!("Digraph(n={}, arcs={})", self.0.n(), self.0.edge_count())
    }
}

#[pyclass(name = "BipartiteGraph", skip_from_py_object)]
#[derive(Clone)]
pub struct PyBipartite(hamcycles::BipartiteGraph);

#[pymethods]
impl PyBipartite {
    #[new]
    fn new(left: usize, right: usize) -> Self {
        PyBipartite(hamcycles::BipartiteGraph::new(left, right))
    }

    #[staticmethod]
    fn complete(left: usize, right: usize) -> Self {
        PyBipartite(hamcycles::BipartiteGraph::complete(left, right))
    }

    #[staticmethod]
    #[pyo3(signature = (left, right, p, seed=0))]
    fn sample(left: usize, right: usize, p: f64, seed: u64) -> PyResult<Self> {
        sample_bipartite(left, right, p, seed).map(PyBipartite).map_err(py_err)
    }

    /// `r`-regular on `n + n` vertices, from `r` overlaid random permutations.
    #[staticmethod]
    #[pyo3(signature = (n, r, seed=0))]
    fn random_regular(n: usize, r: usize, seed: u64) -> PyResult<Self> {
        matching::random_regular_bipartite(n, r, seed).map(PyBipartite).map_err(py_err)
    }

    #[staticmethod]
    fn from_edges(left: usize, right: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        hamcycles::BipartiteGraph::from_edges(left, right, edges).map(PyBipartite).map_err(py_err)
    }

    fn add_edge(&mut self, a: usize, b: usize) -> PyResult<bool> {
        if a >= self.0.left_size() || b >= self.0.right_size() {
            return Err(PyValueError::new_err(format!("edge ({a}, {b}) out of range")));
        }
        Ok(self.0.add_edge(a, b))
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.0.left_size() && b < self.0.right_size() && self.0.has_edge(a, b)
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn is_regular(&self, r: usize) -> bool {
        self.0.is_regular(r)
    }

    fn max_degree(&self) -> usize {
        self.0.max_degree()
    }

    fn __repr__(&self) -> String {
        format!("BipartiteGraph({}+{}, edges={})", self.0.left_size(), self.0.right_size(), self.0.edge_count())
    }
}

/// Exact number of directed Hamilton cycles (n ≤ 22).
#[pyfunction]
fn count_hamilton(d: &PyDigraph) -> PyResult<u128> {
    hamilton::count_hamilton_exact(&d.0).map_err(py_err)
}

/// A Hamilton cycle as a vertex order, or None when none was found.
#[pyfunction]
#[pyo3(signature = (d, seed=0))]
fn find_hamilton(d: &PyDigraph, seed: u64) -> PyResult<Option<Vec<usize>>> {
    match hamilton::find_hamilton(&d.0, &SolverBudget::default(), seed).map_err(py_err)? {
        HamOutcome::Found(c) => Ok(Some(c.order)),
        HamOutcome::NotFound(_) => Ok(None),
    }
}

/// Exact number of perfect matchings (the permanent, N ≤ 30).
#[pyfunction]
fn count_perfect_matchings(g: &PyBipartite) -> PyResult<u128> {
    matching::count_pms(&g.0).map_err(py_err)
}

/// `ln` of the van der Waerden lower bound `(r/N)^N N!`.
#[pyfunction]
fn vdw_bound(n: usize, r: usize) -> PyResult<f64> {
    matching::vdw_bound(n, r).map_err(py_err)
}

/// Splits an `r`-regular bipartite graph into `r` perfect matchings, each
/// given as the list of right partners of the left vertices.
#[pyfunction]
fn hall_decompose(g: &PyBipartite, r: usize) -> PyResult<Vec<Vec<usize>>> {
    let fam = matching::hall_decompose(&g.0, r).map_err(py_err)?;
    Ok(fam
        .matchings
        .iter()
        .map(|m| m.as_permutation().map(<[usize]>::to_vec).unwrap_or_default())
        .collect())
}

/// Largest `r` with an `r`-regular spanning subgraph, and one such subgraph.
#[pyfunction]
fn max_regular_factor(g: &PyBipartite) -> PyResult<(usize, PyBipartite)> {
    matching::max_regular_factor(&g.0).map(|(r, f)| (r, PyBipartite(f))).map_err(py_err)
}

/// Edges of `g` outside `h` that make `h` exactly `r`-regular.
#[pyfunction]
fn complete_r_factor(g: &PyBipartite, h: &PyBipartite, r: usize) -> PyResult<PyBipartite> {
    complete_to_r_factor(&RFactorInstance { g: g.0.clone(), h: h.0.clone(), r })
        .map(PyBipartite)
        .map_err(py_err)
}

#[pyclass(get_all)]
pub struct Params {
    task: String,
    n: usize,
    p: f64,
    ell: usize,
    s: usize,
    m: usize,
    t: usize,
    p_in: f64,
    p_ex: f64,
    json: String,
}

fn task_of(name: &str) -> PyResult<Task> {
    name.parse().map_err(py_err)
}

/// The pipeline shape `(ℓ, s, m, t)` and sampling densities at `(n, p)`.
#[pyfunction]
#[pyo3(signature = (n, p, task, alpha=None, ignore_floor=false))]
fn parameter_policy(n: usize, p: f64, task: &str, alpha: Option<f64>, ignore_floor: bool) -> PyResult<Params> {
    let opts = PolicyOptions { alpha, ignore_floor, ..Default::default() };
    let e = pipelines::parameter_policy(n, p, task_of(task)?, &opts).map_err(py_err)?;
    Ok(Params {
        task: task.to_string(),
        n: e.n,
        p: e.p,
        ell: e.ell,
        s: e.s,
        m: e.m,
        t: e.t,
        p_in: e.p_in,
        p_ex: e.p_ex,
        json: to_json(&e)?,
    })
}

#[pyclass(get_all)]
pub struct CycleReport {
    task: String,
    cycles: Vec<Vec<usize>>,
    /// `len(cycles) / (n p)`.
    ratio_np: f64,
    audit_passed: bool,
    uncovered: Vec<(usize, usize)>,
    wall_ms: u128,
    /// The full report.
    json: String,
}

fn density_or(d: &hamcycles::Digraph, p: Option<f64>) -> f64 {
    p.unwrap_or_else(|| pseudorandom::density(d))
}

/// Arc-disjoint Hamilton cycles. `p` defaults to the measured density.
#[pyfunction]
#[pyo3(signature = (d, p=None, seed=0, ignore_floor=false))]
fn pack(py: Python<'_>, d: &PyDigraph, p: Option<f64>, seed: u64, ignore_floor: bool) -> PyResult<CycleReport> {
    let p = density_or(&d.0, p);
    let opts = PolicyOptions { ignore_floor, ..Default::default() };
    let params = pipelines::parameter_policy(d.0.n(), p, Task::Pack, &opts).map_err(py_err)?;
    let r = py.detach(|| pipelines::pack(&d.0, &params, seed)).map_err(py_err)?;
    Ok(CycleReport {
        task: "pack".into(),
        cycles: r.cycles.iter().map(|c| c.order.clone()).collect(),
        ratio_np: r.ratio_np,
        audit_passed: r.audit.passed(),
        uncovered: Vec::new(),
        wall_ms: r.wall_ms,
        json: to_json(&r)?,
    })
}

/// Hamilton cycles covering every arc; leftovers are listed in `uncovered`.
#[pyfunction]
#[pyo3(signature = (d, p=None, seed=0, ignore_floor=false))]
fn cover(py: Python<'_>, d: &PyDigraph, p: Option<f64>, seed: u64, ignore_floor: bool) -> PyResult<CycleReport> {
    let p = density_or(&d.0, p);
    let opts = PolicyOptions { ignore_floor, ..Default::default() };
    let params = pipelines::parameter_policy(d.0.n(), p, Task::Cover, &opts).map_err(py_err)?;
    let r = py.detach(|| pipelines::cover_report(&d.0, &params, seed)).map_err(py_err)?;
    Ok(CycleReport {
        task: "cover".into(),
        cycles: r.cycles.iter().map(|c| c.order.clone()).collect(),
        ratio_np: r.ratio_np,
        audit_passed: r.audit.passed(),
        uncovered: r.audit.uncovered.clone(),
        wall_ms: r.wall_ms,
        json: to_json(&r)?,
    })
}

/// Packing in a pseudo-random digraph at its measured density.
#[pyfunction]
#[pyo3(signature = (d, lam, seed=0))]
fn pack_pseudorandom(py: Python<'_>, d: &PyDigraph, lam: f64, seed: u64) -> PyResult<CycleReport> {
    let r = py.detach(|| pseudorandom::pack_pseudorandom(&d.0, lam, seed)).map_err(py_err)?;
    Ok(CycleReport {
        task: "pack-pseudo".into(),
        cycles: r.cycles.iter().map(|c| c.order.clone()).collect(),
        ratio_np: r.ratio_np,
        audit_passed: r.audit.passed(),
        uncovered: Vec::new(),
        wall_ms: r.wall_ms,
        json: to_json(&r)?,
    })
}

#[pyclass(get_all)]
pub struct CountReport {
    /// Certified number of Hamilton cycles (a rigorous lower bound).
    certified: u128,
    ln_certified: Option<f64>,
    /// Not certified: partitions times the mean per-partition count.
    ln_extrapolated: Option<f64>,
    /// `ln(n! pⁿ)`.
    ln_reference: f64,
    exact: Option<u128>,
    json: String,
}

#[pyfunction]
#[pyo3(signature = (d, p=None, seed=0, partitions=None))]
fn count(py: Python<'_>, d: &PyDigraph, p: Option<f64>, seed: u64, partitions: Option<usize>) -> PyResult<CountReport> {
    let p = density_or(&d.0, p);
    let params = pipelines::parameter_policy(d.0.n(), p, Task::Count, &PolicyOptions::default()).map_err(py_err)?;
    let k = partitions.unwrap_or(params.partitions_sample);
    let c = py.detach(|| pipelines::count_certify(&d.0, &params, seed, k)).map_err(py_err)?;
    Ok(CountReport {
        certified: c.partitions.iter().map(|pc| pc.cycles).sum(),
        ln_certified: c.ln_certified,
        ln_extrapolated: c.ln_extrapolated,
        ln_reference: c.ln_reference,
        exact: c.exact_count,
        json: to_json(&c)?,
    })
}

#[pyclass(get_all)]
pub struct PseudoReport {
    p1: bool,
    p2: bool,
    p3: bool,
    passed: bool,
    json: String,
}

/// The three pseudo-random properties; `p` defaults to the measured density.
#[pyfunction]
#[pyo3(signature = (d, lam, p=None, seed=0, trials=10_000))]
fn check_pseudorandom(py: Python<'_>, d: &PyDigraph, lam: f64, p: Option<f64>, seed: u64, trials: usize) -> PyResult<PseudoReport> {
    let p = density_or(&d.0, p);
    let budget = CheckBudget { seed, trials, ..Default::default() };
    let r = py.detach(|| pseudorandom::check_pseudorandom(&d.0, lam, p, &budget)).map_err(py_err)?;
    Ok(PseudoReport { p1: r.p1.ok, p2: r.p2.passed(), p3: r.p3.passed(), passed: r.passed(), json: to_json(&r)? })
}

#[pymodule]
#[pyo3(name = "hamcycles")]
fn hamcycles_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigraph>()?;
    m.add_class::<PyBipartite>()?;
    m.add_class::<Params>()?;
    m.add_class::<CycleReport>()?;
    m.add_class::<CountReport>()?;
    m.add_class::<PseudoReport>()?;
    m.add("RefusedError", m.py().get_type::<RefusedError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    for f in [
        wrap_pyfunction!(count_hamilton, m)?,
        wrap_pyfunction!(find_hamilton, m)?,
        wrap_pyfunction!(count_perfect_matchings, m)?,
        wrap_pyfunction!(vdw_bound, m)?,
        wrap_pyfunction!(hall_decompose, m)?,
        wrap_pyfunction!(max_regular_factor, m)?,
        wrap_pyfunction!(complete_r_factor, m)?,
        wrap_pyfunction!(parameter_policy, m)?,
        wrap_pyfunction!(pack, m)?,
        wrap_pyfunction!(cover, m)?,
        wrap_pyfunction!(pack_pseudorandom, m)?,
        wrap_pyfunction!(count, m)?,
        wrap_pyfunction!(check_pseudorandom, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
