//! Python bindings: the sequence, integer polynomials, `xi` enclosures and
//! the experiments. Reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyList;
use rug::Integer;

use markoff_lab::auditors::{audit_estimate_with, audit_policy, registry};
use markoff_lab::experiments::{
    brute_scan, default_threshold, delta_points, lagrange_scan, mj_search, MjOptions, ScanMode, ScanOptions,
};
use markoff_lab::matseq::{
    q_polynomial, seed_search, verify_exact_identity, IntPoly, MarkoffSequence, SeedPair, SymMat2, FAMILIES,
};
use markoff_lab::realfield::{PrecisionPolicy, XiSource, DEFAULT_GUARD_BITS};

create_exception!(markoff_lab_py, MarkoffError, PyException);

fn err(e: markoff_lab::Error) -> PyErr {
    MarkoffError::new_err(format!("{}: {e}", e.name()))
}

fn py_int<'py>(py: Python<'py>, n: &Integer) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((n.to_string(),))
}

fn rust_int(obj: &Bound<'_, PyAny>) -> PyResult<Integer> {
    let s: String = obj.str()?.extract()?;
    s.parse::<Integer>()
        .map_err(|_| MarkoffError::new_err(format!("`{s}` is not an integer")))
}

/// Converts a serializable report to a Python object through JSON.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| MarkoffError::new_err(e.to_string()))?;
    py.import("json")?.getattr("loads")?.call1((text,))
}

fn poly_arg(r: &str) -> PyResult<IntPoly> {
    r.parse::<IntPoly>().map_err(err)
}

/// Integer polynomial, lowest degree first.
#[pyclass(name = "Poly", module = "markoff_lab_py", frozen)]
#[derive(Clone)]
struct PyPoly(IntPoly);

#[pymethods]
impl PyPoly {
    /// From a coefficient list (lowest degree first) or a string like `5T^2 + 9T - 7`.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        if let Ok(s) = spec.extract::<String>() {
            return Ok(PyPoly(poly_arg(&s)?));
        }
        let items: Vec<Bound<'_, PyAny>> = spec.extract()?;
        let coeffs = items.iter().map(rust_int).collect::<PyResult<Vec<_>>>()?;
        Ok(PyPoly(IntPoly::new(coeffs)))
    }

    fn coeffs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let items = self.0.coeffs().iter().map(|c| py_int(py, c)).collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, items)
    }

    fn degree(&self) -> Option<usize> {
        self.0.degree()
    }

    fn norm<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        py_int(py, self.0.norm())
    }

    fn content<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        py_int(py, self.0.content())
    }

    fn __mul__(&self, other: &PyPoly) -> PyPoly {
        PyPoly(self.0.mul(&other.0))
    }

    fn __add__(&self, other: &PyPoly) -> PyPoly {
        PyPoly(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &PyPoly) -> PyPoly {
        PyPoly(self.0.sub(&other.0))
    }

    fn __eq__(&self, other: &PyPoly) -> bool {
        self.0 == other.0
    }

    fn divisible_by(&self, other: &PyPoly) -> bool {
        self.0.divisible_by(&other.0)
    }

    fn __call__<'py>(&self, py: Python<'py>, t: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        py_int(py, &self.0.eval_integer(&rust_int(t)?))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly('{}')", self.0)
    }
}

/// The matrix sequence `x_{k+2} = x_k M_k x_{k+1}`, generated lazily.
#[pyclass(name = "Sequence", module = "markoff_lab_py", frozen)]
struct PySequence(MarkoffSequence);

#[pymethods]
impl PySequence {
    /// Canonical seed by default; otherwise two `(x0, x1, x2)` triples.
    #[new]
    #[pyo3(signature = (x1 = None, x2 = None))]
    fn new(x1: Option<(i64, i64, i64)>, x2: Option<(i64, i64, i64)>) -> PyResult<Self> {
        let seed = match (x1, x2) {
            (None, None) => SeedPair::canonical(),
            (Some(a), Some(b)) => {
                let m = |t: (i64, i64, i64)| SymMat2::from_i64(t.0, t.1, t.2);
                SeedPair::new(m(a).map_err(err)?, m(b).map_err(err)?).map_err(err)?
            }
            _ => return Err(MarkoffError::new_err("give both seed matrices or neither")),
        };
        Ok(PySequence(MarkoffSequence::new(seed)))
    }

    /// `(x_{k,0}, x_{k,1}, x_{k,2})`.
    fn term<'py>(&self, py: Python<'py>, k: usize) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>, Bound<'py, PyAny>)> {
        let m = py.detach(|| self.0.term(k)).map_err(err)?;
        Ok((py_int(py, &m.x0)?, py_int(py, &m.x1)?, py_int(py, &m.x2)?))
    }

    fn q_polynomial(&self, k: usize) -> PyResult<PyPoly> {
        q_polynomial(&self.0, k).map(PyPoly).map_err(err)
    }

    /// Whether the exact identity `family` has residual zero at `k`.
    fn verify(&self, py: Python<'_>, family: &str, k: usize) -> PyResult<bool> {
        py.detach(|| verify_exact_identity(&self.0, family, k))
            .map(|r| r.is_zero())
            .map_err(err)
    }

    /// `xi` to `accuracy` bits as `(decimal center, radius)`.
    #[pyo3(signature = (accuracy = 128.0))]
    fn xi(&self, py: Python<'_>, accuracy: f64) -> PyResult<(String, f64)> {
        let e = py
            .detach(|| XiSource::new(&self.0, DEFAULT_GUARD_BITS).xi(accuracy))
            .map_err(err)?;
        Ok((e.decimal_center(), e.radius_f64()))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn families() -> Vec<&'static str> {
    FAMILIES.iter().map(|f| f.id).collect()
}

#[pyfunction]
fn estimate_ids() -> Vec<String> {
    registry().iter().map(|s| s.id.clone()).collect()
}

/// Number of admissible seed pairs with entries bounded by `bound`.
#[pyfunction]
#[pyo3(signature = (bound = 3))]
fn seed_count(bound: i64) -> usize {
    seed_search(bound).len()
}

/// Normalized-error audit of one estimate over `[k_lo, k_hi]`.
#[pyfunction]
#[pyo3(signature = (seq, id, k_lo = 8, k_hi = 20, r = None))]
fn audit<'py>(
    py: Python<'py>,
    seq: &PySequence,
    id: &str,
    k_lo: usize,
    k_hi: usize,
    r: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = r.map(poly_arg).transpose()?;
    let rep = py
        .detach(|| {
            let pol = audit_policy(&seq.0, id, (k_lo, k_hi), r.as_ref())?;
            audit_estimate_with(&seq.0, id, (k_lo, k_hi), &pol, r.as_ref())
        })
        .map_err(err)?;
    to_py(py, &rep)
}

/// Accumulation points of `{x_{k,0} R(xi)}` as floats.
#[pyfunction]
#[pyo3(signature = (seq, r = "T^3", k_max = 16))]
fn delta(py: Python<'_>, seq: &PySequence, r: &str, k_max: usize) -> PyResult<(Vec<f64>, bool)> {
    let r = poly_arg(r)?;
    let d = py
        .detach(|| {
            let pol = PrecisionPolicy::schedule(&seq.0, k_max, DEFAULT_GUARD_BITS)?;
            delta_points(&seq.0, &r, &pol)
        })
        .map_err(err)?;
    Ok((d.values.iter().map(|e| e.to_f64()).collect(), d.period3))
}

#[pyfunction]
#[pyo3(signature = (seq, j, m_bound = 4000, bits = 1 << 18))]
fn mj<'py>(py: Python<'py>, seq: &PySequence, j: usize, m_bound: i64, bits: u32) -> PyResult<Bound<'py, PyAny>> {
    let opts = MjOptions {
        threshold: default_threshold(j),
        ..Default::default()
    };
    let res = py
        .detach(|| mj_search(&seq.0, j, m_bound, &PrecisionPolicy::with_bits(bits), &opts))
        .map_err(err)?;
    to_py(py, &res)
}

/// Brute-force scan; `r` switches to the `R + P` mode with that fixed `R`.
#[pyfunction]
#[pyo3(signature = (seq, d = 3, height = 12, r = None, exclude_q = false, exponent = None))]
fn scan<'py>(
    py: Python<'py>,
    seq: &PySequence,
    d: usize,
    height: i64,
    r: Option<&str>,
    exclude_q: bool,
    exponent: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match r {
        Some(r) => ScanMode::RPlusP(poly_arg(r)?),
        None => ScanMode::ROnly,
    };
    let opts = ScanOptions {
        exclude_q_divisible: exclude_q,
        exponent,
        ..Default::default()
    };
    let rep = py
        .detach(|| brute_scan(&seq.0, &mode, d, height, &PrecisionPolicy::with_bits(1024), &opts))
        .map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (seq, n_max = 100_000))]
fn lagrange<'py>(py: Python<'py>, seq: &PySequence, n_max: u64) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| lagrange_scan(&seq.0, n_max, &PrecisionPolicy::with_bits(512)))
        .map_err(err)?;
    to_py(py, &rep)
}

#[pymodule]
fn markoff_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MarkoffError", m.py().get_type::<MarkoffError>())?;
    m.add_class::<PyPoly>()?;
    m.add_class::<PySequence>()?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ids, m)?)?;
    m.add_function(wrap_pyfunction!(seed_count, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(mj, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(lagrange, m)?)?;
    Ok(())
}
