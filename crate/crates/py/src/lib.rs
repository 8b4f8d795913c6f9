//! Python module `iaes`: oracles, the min-norm-point solver and the screened driver.

use std::path::PathBuf;

use iaes_core::datagen::{gen_two_moons as gen_moons, grid_edge_count as edge_count, DEFAULT_ALPHA};
use iaes_core::functions::families::Family;
use iaes_core::functions::{ConcaveCardinality, ConcaveShape, CutFunction, Iwata, Modular, WeightedGraph};
use iaes_core::io::load_instance;
use iaes_core::screening::{iaes_solve_with, IaesOptions, ScreeningVariant};
use iaes_core::solver::{default_max_iter, duality_gap as gap_of, solve, SolverKind};
use iaes_core::submodular::{brute_force_sfm, greedy_linear_maximize, lovasz_extension, submodularity_violation};
use iaes_core::{ElementSet, Error, Oracle};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    iaes,
    NumericalError,
    PyRuntimeError,
    "Solver breakdown, negative gap or exhausted budget."
);
create_exception!(
    iaes,
    VerificationError,
    PyRuntimeError,
    "Contradictory screening verdicts."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NegativeGap(_)
        | Error::MaxIterationsExceeded(_)
        | Error::NumericalBreakdown(_)
        | Error::FactorizationFailure(_) => NumericalError::new_err(e.to_string()),
        Error::ConflictingVerdict(_) => VerificationError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// `sqrt`, `log1p` or `truncated:K`.
fn parse_shape(s: &str) -> Result<ConcaveShape, String> {
    match s {
        "sqrt" => Ok(ConcaveShape::Sqrt),
        "log1p" => Ok(ConcaveShape::Log1p),
        _ => match s.strip_prefix("truncated:").map(str::parse) {
            Some(Ok(k)) => Ok(ConcaveShape::Truncated(k)),
            _ => Err(format!("unknown concave shape '{s}'")),
        },
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// A normalized submodular set function over `range(p)`.
#[pyclass(name = "Oracle", module = "iaes", frozen)]
struct PyOracle {
    inner: Oracle,
}

impl PyOracle {
    fn set(&self, indices: Vec<usize>) -> PyResult<ElementSet> {
        let p = self.inner.p();
        if let Some(j) = indices.iter().find(|&&j| j >= p) {
            return Err(PyValueError::new_err(format!(
                "index {j} outside a ground set of size {p}"
            )));
        }
        Ok(ElementSet::from_indices(p, indices))
    }

    fn vector(&self, w: &[f64]) -> PyResult<()> {
        if w.len() != self.inner.p() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.inner.p(),
                got: w.len(),
            }));
        }
        Ok(())
    }
}

#[pymethods]
impl PyOracle {
    /// `F(A) = sum of weights[j] for j in A`.
    #[staticmethod]
    fn modular(weights: Vec<f64>) -> Self {
        Self {
            inner: Oracle::new(Modular::new(weights)),
        }
    }

    /// `scale * g(|A|) + sum of weights[j]` with `g` one of `sqrt`, `log1p`, `truncated:K`.
    #[staticmethod]
    #[pyo3(signature = (p, shape, scale = 1.0, weights = None))]
    fn concave_cardinality(p: usize, shape: &str, scale: f64, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let shape = parse_shape(shape).map_err(PyValueError::new_err)?;
        let weights = weights.unwrap_or_else(|| vec![0.0; p]);
        if weights.len() != p {
            return Err(to_py(Error::DimensionMismatch {
                expected: p,
                got: weights.len(),
            }));
        }
        if !(scale >= 0.0) {
            return Err(PyValueError::new_err(format!("scale {scale} must be nonnegative")));
        }
        Ok(Self {
            inner: Oracle::new(ConcaveCardinality::new(p, shape, scale, weights)),
        })
    }

    #[staticmethod]
    fn iwata(p: usize) -> Self {
        Self {
            inner: Oracle::new(Iwata::new(p)),
        }
    }

    /// Weighted cut plus unary terms; `edges` holds `(i, j, weight)`.
    #[staticmethod]
    fn cut(p: usize, edges: Vec<(usize, usize, f64)>, unary: Vec<f64>) -> PyResult<Self> {
        let graph = WeightedGraph::new(p, edges).map_err(to_py)?;
        Ok(Self {
            inner: Oracle::new(CutFunction::new(graph, unary).map_err(to_py)?),
        })
    }

    /// Mutual-information objective on a seeded two-moons cloud.
    #[staticmethod]
    #[pyo3(signature = (p, p0, seed = 0, alpha = DEFAULT_ALPHA))]
    fn two_moons(p: usize, p0: usize, seed: u64, alpha: f64) -> PyResult<Self> {
        let data = gen_moons(p, p0, seed).map_err(to_py)?;
        Ok(Self {
            inner: data.oracle(alpha).map_err(to_py)?,
        })
    }

    /// `modular`, `concave_cardinality`, `grid_cut` or `iwata`.
    #[staticmethod]
    #[pyo3(signature = (name, p, seed = 0))]
    fn family(name: &str, p: usize, seed: u64) -> PyResult<Self> {
        let family: Family = parse(name)?;
        Ok(Self {
            inner: family.instance(p, seed),
        })
    }

    /// Reads an instance JSON file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (_, inner) = load_instance(&path).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    /// Oracle evaluations so far.
    #[getter]
    fn calls(&self) -> u64 {
        self.inner.calls()
    }

    fn __call__(&self, indices: Vec<usize>) -> PyResult<f64> {
        Ok(self.inner.evaluate(&self.set(indices)?))
    }

    fn evaluate(&self, indices: Vec<usize>) -> PyResult<f64> {
        self.__call__(indices)
    }

    fn lovasz(&self, w: Vec<f64>) -> PyResult<f64> {
        self.vector(&w)?;
        Ok(lovasz_extension(&self.inner, &w))
    }

    /// Greedy vertex of the base polytope maximizing `<w, s>`.
    fn greedy(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        self.vector(&w)?;
        Ok(greedy_linear_maximize(&self.inner, &w).coords)
    }

    /// `(minimum, minimal minimizer, maximal minimizer)` by enumeration.
    fn brute_force(&self, py: Python<'_>) -> PyResult<(f64, Vec<usize>, Vec<usize>)> {
        let oracle = self.inner.clone();
        let bf = py.detach(move || brute_force_sfm(&oracle)).map_err(to_py)?;
        Ok((bf.min_value, bf.minimal.to_vec(), bf.maximal.to_vec()))
    }

    #[pyo3(signature = (tol = 1e-8))]
    fn is_submodular(&self, py: Python<'_>, tol: f64) -> PyResult<bool> {
        let oracle = self.inner.clone();
        let found = py
            .detach(move || submodularity_violation(&oracle, tol))
            .map_err(to_py)?;
        Ok(found.is_none())
    }

    fn __repr__(&self) -> String {
        format!("Oracle(p={})", self.inner.p())
    }
}

/// Result of an unscreened min-norm-point solve.
#[pyclass(name = "SolveResult", module = "iaes", frozen, get_all)]
struct PySolveResult {
    w: Vec<f64>,
    s: Vec<f64>,
    gap: f64,
    iterations: usize,
    oracle_calls: u64,
    converged: bool,
    /// `(iteration, gap, dual_norm, oracle_calls, elapsed_ns)` per major cycle.
    trace: Vec<(usize, f64, f64, u64, u64)>,
}

#[pymethods]
impl PySolveResult {
    /// Elements with positive primal value.
    fn minimizer(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&j| self.w[j] > 0.0).collect()
    }

    fn __repr__(&self) -> String {
        format!("SolveResult(gap={:e}, iterations={})", self.gap, self.iterations)
    }
}

/// Result of a screened solve.
#[pyclass(name = "IaesResult", module = "iaes", frozen, get_all)]
struct PyIaesResult {
    set: Vec<usize>,
    value: f64,
    iterations: usize,
    final_gap: f64,
    oracle_calls: u64,
    rejection_ratio: f64,
    active: Vec<usize>,
    inactive: Vec<usize>,
    screen_time_s: f64,
    solver_time_s: f64,
    /// `(trigger_index, solver_iteration, gap, n_active, n_inactive, rejection_ratio, p_hat)`.
    triggers: Vec<(usize, usize, f64, usize, usize, f64, usize)>,
    /// Gap at every solver iteration.
    gaps: Vec<f64>,
}

#[pymethods]
impl PyIaesResult {
    fn __repr__(&self) -> String {
        format!(
            "IaesResult(value={}, |set|={}, rejection_ratio={})",
            self.value,
            self.set.len(),
            self.rejection_ratio
        )
    }
}

#[pyfunction]
#[pyo3(signature = (oracle, eps = 1e-6, max_iter = None, solver = "wolfe"))]
fn min_norm_point(
    py: Python<'_>,
    oracle: &PyOracle,
    eps: f64,
    max_iter: Option<usize>,
    solver: &str,
) -> PyResult<PySolveResult> {
    let kind: SolverKind = parse(solver)?;
    if !(eps > 0.0) {
        return Err(PyValueError::new_err(format!("eps must be positive, got {eps}")));
    }
    let f = oracle.inner.clone();
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(f.p()));
    let r = py
        .detach(move || solve(kind, &f, eps, max_iter, &mut |_, _| {}))
        .map_err(to_py)?;
    Ok(PySolveResult {
        w: r.w_star,
        s: r.s_star,
        gap: r.final_gap,
        iterations: r.iterations,
        oracle_calls: r.oracle_calls,
        converged: r.converged,
        trace: r
            .trace
            .iter()
            .map(|t| (t.iteration, t.gap, t.dual_norm, t.oracle_calls, t.elapsed_ns as u64))
            .collect(),
    })
}

#[pyfunction]
#[pyo3(signature = (oracle, eps = 1e-6, rho = 0.5, solver = "wolfe", screening = "iaes", max_iter = None))]
fn iaes_solve(
    py: Python<'_>,
    oracle: &PyOracle,
    eps: f64,
    rho: f64,
    solver: &str,
    screening: &str,
    max_iter: Option<usize>,
) -> PyResult<PyIaesResult> {
    let opts = IaesOptions {
        eps,
        rho,
        solver: parse(solver)?,
        variant: parse::<ScreeningVariant>(screening)?,
        max_iter,
    };
    let f = oracle.inner.clone();
    let out = py
        .detach(move || iaes_solve_with(&f, &opts, &mut |_, _, _| {}))
        .map_err(to_py)?;
    let r = &out.report;
    Ok(PyIaesResult {
        set: out.set.to_vec(),
        value: out.value,
        iterations: r.iterations,
        final_gap: r.final_gap,
        oracle_calls: r.oracle_calls,
        rejection_ratio: r.rejection_ratio(),
        active: r.state.active.to_vec(),
        inactive: r.state.inactive.to_vec(),
        screen_time_s: r.screen_time.as_secs_f64(),
        solver_time_s: r.solver_time.as_secs_f64(),
        triggers: r
            .triggers
            .iter()
            .map(|t| {
                (
                    t.trigger_index,
                    t.solver_iteration,
                    t.gap,
                    t.n_active,
                    t.n_inactive,
                    t.rejection_ratio,
                    t.p_hat,
                )
            })
            .collect(),
        gaps: r.trace.iter().map(|t| t.gap).collect(),
    })
}

/// `f(w) + 1/2 |w|^2 + 1/2 |s|^2` for `s` in the base polytope.
#[pyfunction]
fn duality_gap(oracle: &PyOracle, w: Vec<f64>, s: Vec<f64>) -> PyResult<f64> {
    oracle.vector(&w)?;
    oracle.vector(&s)?;
    gap_of(&oracle.inner, &w, &s).map_err(to_py)
}

/// `(points, moon_ids, labels)` of a seeded two-moons cloud.
#[pyfunction]
#[pyo3(signature = (p, p0, seed = 0))]
#[allow(clippy::type_complexity)]
fn gen_two_moons(p: usize, p0: usize, seed: u64) -> PyResult<(Vec<(f64, f64)>, Vec<u8>, Vec<(usize, bool)>)> {
    let d = gen_moons(p, p0, seed).map_err(to_py)?;
    Ok((d.points.iter().map(|q| (q[0], q[1])).collect(), d.moon_id, d.labels))
}

#[pyfunction]
fn grid_edge_count(height: usize, width: usize) -> usize {
    edge_count(height, width)
}

#[pymodule]
fn iaes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOracle>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyIaesResult>()?;
    m.add_function(wrap_pyfunction!(min_norm_point, m)?)?;
    m.add_function(wrap_pyfunction!(iaes_solve, m)?)?;
    m.add_function(wrap_pyfunction!(duality_gap, m)?)?;
    m.add_function(wrap_pyfunction!(gen_two_moons, m)?)?;
    m.add_function(wrap_pyfunction!(grid_edge_count, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    Ok(())
}
