//! Python bindings for the `spectral_csp` crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spectral_csp::cheeger::{csp_expansion, verify_cheeger, Gamma2Config};
use spectral_csp::commands::{parse_mode, FamilySpec};
use spectral_csp::format::{parse_instance, serialize_instance};
use spectral_csp::ordering::{crossing_matrix, incidence_matrix};
use spectral_csp::report::Check;
use spectral_csp::sparsifier::{spectral_sparsify, SamplerConfig, SparsifyConfig};
use spectral_csp::{
    BooleanAssignment, Constraint, CspError, CspInstance, FieldPrime, FractionalAssignment, Permutation,
};

fn py_err(e: CspError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A weighted field-affine CSP instance.
#[pyclass(name = "Instance", module = "spectral_csp_py", from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: CspInstance,
}

#[pymethods]
impl PyInstance {
    /// `constraints` is a list of `(vars, coeffs, offset, weight)` with
    /// 0-based variable indices.
    #[new]
    fn new(n: usize, p: u64, constraints: Vec<(Vec<usize>, Vec<i64>, i64, f64)>) -> PyResult<Self> {
        let field = FieldPrime::new(p).map_err(py_err)?;
        let cs = constraints
            .into_iter()
            .map(|(v, a, b, w)| Constraint::new(field, v, a, b, w))
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        let inner = CspInstance::new(n, field, cs).map_err(py_err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: parse_instance(text).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        serialize_instance(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.field().get()
    }

    fn constraints(&self) -> Vec<(Vec<usize>, Vec<u32>, u32, f64)> {
        self.inner
            .constraints()
            .iter()
            .map(|c| (c.vars().to_vec(), c.coeffs().to_vec(), c.offset(), c.weight()))
            .collect()
    }

    fn energy(&self, x: Vec<f64>) -> PyResult<f64> {
        let x = FractionalAssignment::new(x).map_err(py_err)?;
        self.inner.energy(&x).map_err(py_err)
    }

    fn csp_value(&self, bits: Vec<u8>) -> PyResult<f64> {
        let x = BooleanAssignment::new(&bits).map_err(py_err)?;
        self.inner.csp_value(&x).map_err(py_err)
    }

    fn augment(&self) -> Self {
        PyInstance {
            inner: self.inner.augment(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={}, p={})", self.inner.n(), self.inner.m(), self.inner.field())
    }
}

fn checks_to_py<'py>(py: Python<'py>, checks: &[Check]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    checks
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("name", &c.name)?;
            d.set_item("passed", c.passed)?;
            d.set_item("margin", c.margin)?;
            d.set_item("tol", c.tol)?;
            Ok(d)
        })
        .collect()
}

fn permutation(order: Vec<usize>) -> PyResult<Permutation> {
    Permutation::new(order).map_err(py_err)
}

/// Random instance with the given shape; deterministic per seed.
#[pyfunction]
#[pyo3(signature = (n, m, p, arity, wmin=1.0, wmax=1.0, seed=0))]
fn generate_random(n: usize, m: usize, p: u64, arity: usize, wmin: f64, wmax: f64, seed: u64) -> PyResult<PyInstance> {
    let inner = spectral_csp::generate::generate_random(n, m, p, arity, (wmin, wmax), seed).map_err(py_err)?;
    Ok(PyInstance { inner })
}

/// Even-arity XOR instance over F_2.
#[pyfunction]
#[pyo3(signature = (n, m, max_arity=2, wmin=1.0, wmax=1.0, seed=0))]
fn generate_even_xor(n: usize, m: usize, max_arity: usize, wmin: f64, wmax: f64, seed: u64) -> PyResult<PyInstance> {
    let inner = spectral_csp::generate::generate_even_xor(n, m, max_arity, (wmin, wmax), seed).map_err(py_err)?;
    Ok(PyInstance { inner })
}

/// Returns the sparsified instance and a dict with `kept`, `attempts`,
/// `family_size` and `heuristic`.
#[pyfunction]
#[pyo3(signature = (instance, eps, seed=0, mode="exhaustive"))]
fn sparsify<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    eps: f64,
    seed: u64,
    mode: &str,
) -> PyResult<(PyInstance, Bound<'py, PyDict>)> {
    let config = SparsifyConfig {
        mode: parse_mode(mode).map_err(py_err)?,
        sampler: SamplerConfig::default(),
    };
    let res = py
        .detach(|| spectral_sparsify(&instance.inner, eps, seed, &config))
        .map_err(py_err)?;
    let sparse = res.apply(&instance.inner).map_err(py_err)?;
    let info = PyDict::new(py);
    info.set_item("kept", res.kept.iter().map(|&(i, _)| i).collect::<Vec<_>>())?;
    info.set_item("attempts", res.attempts)?;
    info.set_item("family_size", res.family_size)?;
    info.set_item("heuristic", res.heuristic)?;
    Ok((PyInstance { inner: sparse }, info))
}

/// Sparsifier checks as a list of dicts; `family` is auto, exhaustive,
/// sampled:K or none.
#[pyfunction]
#[pyo3(signature = (original, sparse, eps, n_random=100, seed=0, family="auto"))]
fn verify<'py>(
    py: Python<'py>,
    original: &PyInstance,
    sparse: &PyInstance,
    eps: f64,
    n_random: usize,
    seed: u64,
    family: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let family: FamilySpec = family.parse().map_err(py_err)?;
    let report = py
        .detach(|| spectral_csp::commands::verify(&original.inner, &sparse.inner, eps, n_random, seed, family))
        .map_err(py_err)?;
    checks_to_py(py, &report.checks)
}

/// `B^inc` for the ordering `order` (smallest value first).
#[pyfunction]
fn incidence(instance: &PyInstance, order: Vec<usize>) -> PyResult<Vec<Vec<i64>>> {
    let m = incidence_matrix(&instance.inner, &permutation(order)?).map_err(py_err)?;
    Ok(m.matrix().to_rows())
}

/// `B^cross` for the ordering `order`.
#[pyfunction]
fn crossing(instance: &PyInstance, order: Vec<usize>) -> PyResult<Vec<Vec<i64>>> {
    let m = crossing_matrix(&instance.inner, &permutation(order)?).map_err(py_err)?;
    Ok(m.matrix().to_rows())
}

/// `(Φ_C, S)` by exhaustive enumeration.
#[pyfunction]
fn expansion(instance: &PyInstance) -> PyResult<(f64, Vec<usize>)> {
    let (phi, s) = csp_expansion(&instance.inner).map_err(py_err)?;
    Ok((phi, s.members().to_vec()))
}

/// Cheeger analysis of an even-arity XOR instance.
#[pyfunction]
#[pyo3(signature = (instance, restarts=64, iterations=200, seed=0))]
fn cheeger<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = Gamma2Config {
        restarts,
        iterations,
        seed,
    };
    let rep = py
        .detach(|| verify_cheeger(&instance.inner, &config))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("expansion", rep.expansion)?;
    d.set_item("expansion_set", rep.expansion_set.members().to_vec())?;
    d.set_item("gamma2_upper", rep.gamma2)?;
    d.set_item("ell", rep.ell)?;
    d.set_item("rounded_set", rep.rounded.set.members().to_vec())?;
    d.set_item("rounded_expansion", rep.rounded.expansion)?;
    d.set_item("certified_bound", rep.rounded.certified_bound)?;
    d.set_item("checks", checks_to_py(py, &rep.checks)?)?;
    d.set_item("passed", rep.all_passed())?;
    Ok(d)
}

#[pymodule]
fn spectral_csp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(generate_random, m)?)?;
    m.add_function(wrap_pyfunction!(generate_even_xor, m)?)?;
    m.add_function(wrap_pyfunction!(sparsify, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(incidence, m)?)?;
    m.add_function(wrap_pyfunction!(crossing, m)?)?;
    m.add_function(wrap_pyfunction!(expansion, m)?)?;
    m.add_function(wrap_pyfunction!(cheeger, m)?)?;
    Ok(())
}
