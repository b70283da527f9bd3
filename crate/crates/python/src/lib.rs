//! Python bindings: exact measures on finite carriers, interval combinations,
//! σ-algebra generation, the law suites and the demos.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use supercvx::giry::{integrate, mixture, pushforward, ProbMeasure};
use supercvx::laws::{self, LawConfig};
use supercvx::meas::FiniteMeasurableSpace;
use supercvx::numerics::{format_rational, parse_rational, ExtReal, PartitionOfOne, Rational};
use supercvx::scvx::{make_interval_space, IntervalKind, SuperConvexSpace};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational_arg(text: &str) -> PyResult<Rational> {
    parse_rational(text).map_err(value_error)
}

fn ext_arg(text: &str) -> PyResult<ExtReal> {
    ExtReal::parse(text).map_err(value_error)
}

fn interval(name: &str) -> PyResult<IntervalKind> {
    match name {
        "closed_unit" => Ok(IntervalKind::ClosedUnit),
        "open_unit" => Ok(IntervalKind::OpenUnit),
        "ext_real" => Ok(IntervalKind::ExtRealLine),
        other => Err(value_error(format!("unknown space {other:?}"))),
    }
}

fn partition(weights: &[String]) -> PyResult<PartitionOfOne> {
    let ws = weights.iter().map(|w| rational_arg(w)).collect::<PyResult<Vec<_>>>()?;
    PartitionOfOne::from_weights(ws).map_err(value_error)
}

/// A finitely supported probability measure on `{0, 1, ...}` with exact
/// rational weights written as `"p/q"`.
#[pyclass(name = "Measure", module = "supercvx", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyMeasure {
    inner: ProbMeasure<usize>,
}

#[pymethods]
impl PyMeasure {
    #[new]
    fn new(atoms: Vec<(usize, String)>) -> PyResult<Self> {
        let atoms = atoms.into_iter().map(|(x, w)| Ok((x, rational_arg(&w)?))).collect::<PyResult<Vec<_>>>()?;
        Ok(PyMeasure { inner: ProbMeasure::from_atoms(atoms).map_err(value_error)? })
    }

    #[staticmethod]
    fn dirac(x: usize) -> Self {
        PyMeasure { inner: supercvx::giry::dirac(x) }
    }

    #[staticmethod]
    fn uniform(points: Vec<usize>) -> PyResult<Self> {
        if points.is_empty() {
            return Err(value_error("uniform needs at least one point"));
        }
        Ok(PyMeasure { inner: ProbMeasure::uniform(points) })
    }

    /// `Σ ω_i P_i`.
    #[staticmethod]
    fn mixture(weights: Vec<String>, measures: Vec<PyMeasure>) -> PyResult<Self> {
        let ms: Vec<_> = measures.into_iter().map(|m| m.inner).collect();
        Ok(PyMeasure { inner: mixture(&partition(&weights)?, &ms).map_err(value_error)? })
    }

    fn atoms(&self) -> Vec<(usize, String)> {
        self.inner.atoms().map(|(x, w)| (*x, format_rational(w))).collect()
    }

    fn mass(&self, subset: Vec<usize>) -> String {
        format_rational(&self.inner.mass_where(|x| subset.contains(x)))
    }

    /// `∫ f dP` with `f` given by its values on `0, 1, ...`; `"inf"` allowed.
    fn integrate(&self, values: Vec<String>) -> PyResult<String> {
        let f = values.iter().map(|v| ext_arg(v)).collect::<PyResult<Vec<_>>>()?;
        if let Some((x, _)) = self.inner.atoms().find(|(x, _)| **x >= f.len()) {
            return Err(value_error(format!("no value given for atom {x}")));
        }
        Ok(integrate(&self.inner, |&x| f[x].clone()).to_json_string())
    }

    /// Image measure along `x ↦ table[x]`.
    fn pushforward(&self, table: Vec<usize>) -> PyResult<Self> {
        if let Some((x, _)) = self.inner.atoms().find(|(x, _)| **x >= table.len()) {
            return Err(value_error(format!("no image given for atom {x}")));
        }
        Ok(PyMeasure { inner: pushforward(&self.inner, |&x| table[x]) })
    }

    fn __eq__(&self, other: &PyMeasure) -> bool {
        self.inner == other.inner
    }

    fn __len__(&self) -> usize {
        self.inner.support_len()
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self.atoms().into_iter().map(|(x, w)| format!("({x}, '{w}')")).collect();
        format!("Measure([{}])", parts.join(", "))
    }
}

/// Finite combination in `closed_unit`, `open_unit` or `ext_real`.
#[pyfunction]
fn combine(space: &str, weights: Vec<String>, values: Vec<String>) -> PyResult<String> {
    let space = make_interval_space(interval(space)?);
    let values = values.iter().map(|v| ext_arg(v)).collect::<PyResult<Vec<_>>>()?;
    Ok(space.combine(&partition(&weights)?, &values).map_err(value_error)?.to_json_string())
}

/// Smallest σ-algebra containing the generators, as sorted label lists.
#[pyfunction]
fn generate_sigma_algebra(carrier: Vec<String>, generators: Vec<Vec<String>>) -> PyResult<Vec<Vec<String>>> {
    let full = FiniteMeasurableSpace::powerset(carrier.clone()).map_err(value_error)?;
    let masks = generators.iter().map(|g| full.subset_of(g)).collect::<Result<Vec<_>, _>>().map_err(value_error)?;
    let space = supercvx::meas::generate_sigma_algebra(carrier, &masks).map_err(value_error)?;
    Ok(space.to_record().sigma)
}

/// Runs the law suites and returns the JSON report array.
#[pyfunction]
#[pyo3(signature = (seed = 0, cases = 200, suite = None, mutants = false))]
fn run_laws(py: Python<'_>, seed: u64, cases: usize, suite: Option<&str>, mutants: bool) -> PyResult<String> {
    if cases == 0 {
        return Err(value_error("cases must be positive"));
    }
    let pattern = suite.map(glob::Pattern::new).transpose().map_err(value_error)?;
    let config = LawConfig { seed, cases, ..LawConfig::default() };
    let reports = py.detach(|| laws::run_suites(&laws::select(pattern.as_ref(), mutants), &config));
    serde_json::to_string(&reports).map_err(value_error)
}

/// `Σ_{i≤N} 2^-i · i·2^i` as `"p/q"`.
#[pyfunction]
fn divergent_sum(n: usize) -> PyResult<String> {
    Ok(format_rational(&laws::demo_divergent_sum(n).map_err(value_error)?))
}

/// Rows `(N, closed form, quadrature)` of the truncated half-Cauchy means.
#[pyfunction]
fn half_cauchy(ns: Vec<f64>) -> PyResult<Vec<(f64, f64, f64)>> {
    let demo = laws::demo_half_cauchy(&ns).map_err(value_error)?;
    Ok(demo.rows.iter().map(|r| (r.n, r.closed_form, r.quadrature)).collect())
}

/// Enclosure `(lower, upper)` of the `(0, 1)` barycenter of
/// `Σ 2^-i δ_{1/(i+1)}`, as `"p/q"` strings.
#[pyfunction]
#[pyo3(signature = (depth = 50))]
fn open_interval_barycenter(depth: usize) -> PyResult<(String, String)> {
    let demo = laws::demo_open_interval(depth).map_err(value_error)?;
    Ok((format_rational(demo.enclosure.lower()), demo.enclosure.upper().to_json_string()))
}

pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sigma_algebra, m)?)?;
    m.add_function(wrap_pyfunction!(run_laws, m)?)?;
    m.add_function(wrap_pyfunction!(divergent_sum, m)?)?;
    m.add_function(wrap_pyfunction!(half_cauchy, m)?)?;
    m.add_function(wrap_pyfunction!(open_interval_barycenter, m)?)?;
    Ok(())
}

#[pymodule]
#[pyo3(name = "supercvx")]
fn supercvx_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
