//! Python bindings. Grids cross the boundary as nested lists, structured
//! results as plain dicts and lists.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use ::walsh_lprf::harness::{self, CoefficientDist, ExperimentConfig, Fault, IdentityConfig};
use ::walsh_lprf::walsh::inverse_walsh_transform_2d;
use ::walsh_lprf::{self as wl, CoeffMatrix, Resolution, SpectralIndex, SpectralRectangle};

fn py_err(e: wl::Error) -> PyErr {
    match e {
        wl::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for wl::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let items = xs
                .iter()
                .map(|x| to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize_to_py<'py>(py: Python<'py>, x: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn res(m: u32) -> PyResult<Resolution> {
    Resolution::new(m).or_py()
}

fn rect_from(t: (u64, u64, u64, u64)) -> PyResult<SpectralRectangle> {
    SpectralRectangle::from_corners(t.0, t.1, t.2, t.3).or_py()
}

fn rect_to(r: &SpectralRectangle) -> (u64, u64, u64, u64) {
    (
        r.axis1.start(),
        r.axis1.end(),
        r.axis2.start(),
        r.axis2.end(),
    )
}

/// A real function on the `2^m × 2^m` dyadic grid, indexed `[j1][j2]`.
#[pyclass(
    name = "GridFunction",
    module = "walsh_lprf",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyGrid {
    inner: wl::GridFunction,
}

impl From<wl::GridFunction> for PyGrid {
    fn from(inner: wl::GridFunction) -> Self {
        PyGrid { inner }
    }
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        wl::GridFunction::from_rows(&rows).map(Into::into).or_py()
    }

    #[staticmethod]
    fn zeros(m: u32) -> PyResult<Self> {
        Ok(wl::GridFunction::zeros(res(m)?).into())
    }

    /// The product character `w_{n1}(x) w_{n2}(y)`.
    #[staticmethod]
    fn walsh(m: u32, n1: u64, n2: u64) -> PyResult<Self> {
        wl::GridFunction::walsh(res(m)?, SpectralIndex::new(n1, n2))
            .map(Into::into)
            .or_py()
    }

    /// Synthesizes a grid from a square matrix of Paley coefficients.
    #[staticmethod]
    fn from_coefficients(coeffs: Vec<Vec<f64>>) -> PyResult<Self> {
        let shape = wl::GridFunction::from_rows(&coeffs).or_py()?;
        let c = CoeffMatrix::new(shape.resolution(), shape.into_values()).or_py()?;
        Ok(inverse_walsh_transform_2d(&c).into())
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.resolution().m()
    }

    #[getter]
    fn side(&self) -> usize {
        self.inner.side()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    /// Paley coefficients `c[n1][n2]`.
    fn transform(&self) -> Vec<Vec<f64>> {
        let side = self.inner.side();
        wl::walsh_transform_2d(&self.inner)
            .coeffs()
            .chunks(side)
            .map(<[f64]>::to_vec)
            .collect()
    }

    fn modulate(&self, n1: u64, n2: u64) -> PyResult<Self> {
        self.inner
            .modulate(SpectralIndex::new(n1, n2))
            .map(Into::into)
            .or_py()
    }

    fn cond_expect(&self, n1: u64, n2: u64) -> PyResult<Self> {
        wl::cond_expect(&self.inner, SpectralIndex::new(n1, n2))
            .map(Into::into)
            .or_py()
    }

    fn mart_diff(&self, k1: u64, k2: u64) -> PyResult<Self> {
        wl::mart_diff(&self.inner, SpectralIndex::new(k1, k2))
            .map(Into::into)
            .or_py()
    }

    fn square_function(&self) -> Self {
        wl::square_function(&self.inner).into()
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        wl::lp_norm(&self.inner, p).or_py()
    }

    fn hardy_norm(&self, p: f64) -> PyResult<f64> {
        wl::hardy_norm(&self.inner, p).or_py()
    }

    fn max_abs_diff(&self, other: &PyGrid) -> PyResult<f64> {
        self.inner.max_abs_diff(&other.inner).or_py()
    }

    fn __add__(&self, other: &PyGrid) -> PyResult<Self> {
        self.inner.add(&other.inner).map(Into::into).or_py()
    }

    fn __sub__(&self, other: &PyGrid) -> PyResult<Self> {
        self.inner.sub(&other.inner).map(Into::into).or_py()
    }

    fn __mul__(&self, c: f64) -> Self {
        self.inner.scale(c).into()
    }

    fn __eq__(&self, other: &PyGrid) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "GridFunction(m={}, max_abs={:.6e})",
            self.m(),
            self.inner.max_abs()
        )
    }
}

#[pyfunction]
fn walsh_on_cell(n: u64, j: usize, m: u32) -> PyResult<i8> {
    wl::walsh_on_cell(n, j, res(m)?).or_py()
}

#[pyfunction]
fn rademacher_on_cell(k: u32, j: usize, m: u32) -> PyResult<i8> {
    wl::rademacher_on_cell(k, j, res(m)?).or_py()
}

#[pyfunction]
fn fwht_forward(values: Vec<f64>) -> PyResult<Vec<f64>> {
    wl::fwht_paley_forward(&values).or_py()
}

#[pyfunction]
fn fwht_inverse(coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
    wl::fwht_paley_inverse(&coeffs).or_py()
}

/// Decomposition of `[a, b)` into a singleton and rising/falling dyadic blocks.
#[pyfunction]
fn decompose_interval<'py>(py: Python<'py>, a: u64, b: u64) -> PyResult<Bound<'py, PyAny>> {
    let iv = wl::Interval1D::new(a, b).or_py()?;
    serialize_to_py(py, &wl::decompose_interval(iv))
}

/// Block decomposition of `[a1, b1) × [a2, b2)`.
#[pyfunction]
fn decompose_rectangle<'py>(
    py: Python<'py>,
    a1: u64,
    b1: u64,
    a2: u64,
    b2: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rect = rect_from((a1, b1, a2, b2))?;
    serialize_to_py(py, &wl::decompose_rectangle(rect))
}

/// Guillotine partition of `[0, 2^m)²` as `(a1, b1, a2, b2)` tuples, `b` exclusive.
#[pyfunction]
#[pyo3(signature = (m, seed, min_block = 1))]
fn gen_guillotine_partition(
    m: u32,
    seed: u64,
    min_block: u64,
) -> PyResult<Vec<(u64, u64, u64, u64)>> {
    let rects = harness::gen_guillotine_partition(res(m)?, seed, min_block);
    Ok(rects.iter().map(rect_to).collect())
}

#[pyfunction]
#[pyo3(signature = (m, rect, seed, dist = "gaussian"))]
fn sample_spectral_function(
    m: u32,
    rect: (u64, u64, u64, u64),
    seed: u64,
    dist: &str,
) -> PyResult<PyGrid> {
    let dist: CoefficientDist = dist.parse().or_py()?;
    harness::sample_spectral_function_seeded(&rect_from(rect)?, res(m)?, seed, dist)
        .map(Into::into)
        .or_py()
}

fn grids(fs: &[PyRef<'_, PyGrid>]) -> Vec<wl::GridFunction> {
    fs.iter().map(|g| g.inner.clone()).collect()
}

#[pyfunction]
fn lprf_ratio(fs: Vec<PyRef<'_, PyGrid>>, p: f64) -> PyResult<f64> {
    harness::lprf_ratio(&grids(&fs), p).or_py()
}

/// `G h` for the shift family and components built from `rects` and `fs`;
/// equals `Σ fs` whenever each `f` is band-limited to its rectangle.
#[pyfunction]
fn reconstruct(
    m: u32,
    rects: Vec<(u64, u64, u64, u64)>,
    fs: Vec<PyRef<'_, PyGrid>>,
) -> PyResult<PyGrid> {
    let rects = rects
        .into_iter()
        .map(rect_from)
        .collect::<PyResult<Vec<_>>>()?;
    let (fam, h) = wl::build_from_partition(res(m)?, &rects, &grids(&fs)).or_py()?;
    wl::apply_g(&fam, &h).map(Into::into).or_py()
}

/// Rectangle atom on the dyadic rectangle at scale `(n1, n2)`, position `(k1, k2)`.
#[pyfunction]
#[pyo3(signature = (m, n1, n2, k1, k2, p = 1.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn make_rectangle_atom<'py>(
    py: Python<'py>,
    m: u32,
    n1: u32,
    n2: u32,
    k1: u64,
    k2: u64,
    p: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let support = wl::DyadicSpatialRect::new(n1, n2, k1, k2).or_py()?;
    let atom = wl::make_rectangle_atom(res(m)?, support, p, seed).or_py()?;
    let d = PyDict::new(py);
    d.set_item("support", serialize_to_py(py, &atom.support)?)?;
    d.set_item("measure", support.measure())?;
    d.set_item("p", atom.p)?;
    d.set_item("degenerate", atom.degenerate)?;
    d.set_item("values", PyGrid::from(atom.values))?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (
    m = 5, trials = 200, p_list = None, seed = None, partition = "guillotine",
    min_block = 1, dist = "gaussian", out = None, csv = None
))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    m: u32,
    trials: usize,
    p_list: Option<Vec<f64>>,
    seed: Option<u64>,
    partition: &str,
    min_block: u64,
    dist: &str,
    out: Option<std::path::PathBuf>,
    csv: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        m,
        trials,
        p_list: p_list.unwrap_or(defaults.p_list.clone()),
        seed: seed.unwrap_or(defaults.seed),
        partition: partition.parse().or_py()?,
        min_block,
        dist: dist.parse().or_py()?,
        out_json: out,
        out_csv: csv,
        ..defaults
    };
    let report = py.detach(|| harness::run_experiment(&cfg)).or_py()?;
    serialize_to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (m = 5, seed = None, trials = 50, interval_bound = 512, inject_fault = false))]
fn verify_identities<'py>(
    py: Python<'py>,
    m: u32,
    seed: Option<u64>,
    trials: usize,
    interval_bound: u64,
    inject_fault: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = IdentityConfig {
        m,
        seed: seed.unwrap_or(IdentityConfig::default().seed),
        trials,
        interval_bound,
        fault: inject_fault.then_some(Fault::CorruptDecomposition),
        ..Default::default()
    };
    let report = py.detach(|| harness::verify_identities(&cfg)).or_py()?;
    let out = serialize_to_py(py, &report)?;
    out.set_item("passed", report.passed())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "walsh_lprf")]
fn walsh_lprf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(walsh_on_cell, m)?)?;
    m.add_function(wrap_pyfunction!(rademacher_on_cell, m)?)?;
    m.add_function(wrap_pyfunction!(fwht_forward, m)?)?;
    m.add_function(wrap_pyfunction!(fwht_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_interval, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_rectangle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_guillotine_partition, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spectral_function, m)?)?;
    m.add_function(wrap_pyfunction!(lprf_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(make_rectangle_atom, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identities, m)?)?;
    m.add(
        "REPORT_SCHEMA_VERSION",
        harness::experiment::REPORT_SCHEMA_VERSION,
    )?;
    Ok(())
}
