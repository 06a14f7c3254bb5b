//! Python bindings: `import wishart_spectra`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wishart_core::bernoulli as bern;
use wishart_core::checks;
use wishart_core::heavytail as heavy;
use wishart_core::limitlaw;
use wishart_core::spectra;
use wishart_core::treewords::{self, TableCache, DEFAULT_GUARD};
use wishart_core::Error;

create_exception!(wishart_spectra, ResourceLimitError, PyException, "Enumeration guard exceeded.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ResourceLimit { .. } => ResourceLimitError::new_err(e.to_string()),
        Error::Numeric(_) => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) | Error::Cache(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait PyResultExt<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> PyResultExt<T> for wishart_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn tables(guard: u32) -> TableCache {
    TableCache::in_memory(guard)
}

#[pyclass(name = "BernoulliParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyBernoulliParams(bern::BernoulliParams);

#[pymethods]
impl PyBernoulliParams {
    #[new]
    #[pyo3(signature = (alpha, c, centered = false))]
    fn new(alpha: f64, c: f64, centered: bool) -> PyResult<Self> {
        Ok(Self(bern::BernoulliParams::new(alpha, c, centered).py_err()?))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn centered(&self) -> bool {
        self.0.centered
    }

    fn __repr__(&self) -> String {
        format!("BernoulliParams(alpha={}, c={}, centered={})", self.0.alpha, self.0.c, self.0.centered)
    }
}

#[pyclass(name = "HeavyTailParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyHeavyTailParams(heavy::HeavyTailParams);

#[pymethods]
impl PyHeavyTailParams {
    #[new]
    #[pyo3(signature = (beta, b, alpha))]
    fn new(beta: f64, b: f64, alpha: f64) -> PyResult<Self> {
        Ok(Self(heavy::HeavyTailParams::new(beta, b, alpha).py_err()?))
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    #[getter(B)]
    fn b(&self) -> f64 {
        self.0.b
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    /// Truncation level `B n^{1/(beta-1)}`.
    fn cutoff(&self, n: usize) -> f64 {
        self.0.cutoff(n)
    }

    fn __repr__(&self) -> String {
        format!("HeavyTailParams(beta={}, B={}, alpha={})", self.0.beta, self.0.b, self.0.alpha)
    }
}

/// Eigenvalues of one sampled Wishart matrix.
#[pyclass(name = "SpectralSample", frozen, from_py_object)]
#[derive(Clone)]
struct PySpectralSample(spectra::SpectralSample);

#[pymethods]
impl PySpectralSample {
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn moments(&self, kmax: usize) -> PyResult<Vec<f64>> {
        Ok(spectra::empirical_moments(&self.0, kmax).py_err()?.moments)
    }

    fn stieltjes(&self, z: Complex64) -> PyResult<Complex64> {
        spectra::empirical_stieltjes(&self.0, z).py_err()
    }

    /// `(centers, density, underflow, overflow)`; the range defaults to
    /// `[0, (1 + sqrt(alpha))^2 + 1]`.
    #[pyo3(signature = (bins = spectra::DEFAULT_BINS, range = None))]
    fn histogram(&self, bins: usize, range: Option<(f64, f64)>) -> PyResult<(Vec<f64>, Vec<f64>, f64, f64)> {
        let range = range.unwrap_or_else(|| spectra::default_range(self.0.model.alpha()));
        let h = spectra::histogram(&self.0, bins, range).py_err()?;
        Ok((h.centers, h.density, h.underflow, h.overflow))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        spectra::write_sample(&self.0, &path).py_err()
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self(spectra::read_sample(&path).py_err()?))
    }

    fn __len__(&self) -> usize {
        self.0.n
    }

    fn __repr__(&self) -> String {
        format!("SpectralSample(n={}, m={}, seed={})", self.0.n, self.0.m, self.0.seed)
    }
}

/// Exact counts of tree words of half-length `k` as a list of
/// `(a, s, l, b, count)` tuples, `b` being the multiplicity list.
/// `(a, s, l, multiplicities, count)` for one class.
type TableRow = (u32, u32, u32, Vec<u32>, u128);

#[pyfunction]
#[pyo3(signature = (k, guard = DEFAULT_GUARD))]
fn count_table(py: Python<'_>, k: u32, guard: u32) -> PyResult<Vec<TableRow>> {
    let table = py.detach(|| treewords::count_table(k, guard)).py_err()?;
    table
        .entries()
        .iter()
        .map(|(key, count)| {
            let count = u128::try_from(count.clone())
                .map_err(|_| PyValueError::new_err("count does not fit in 128 bits"))?;
            Ok((key.a, key.s, key.l, key.b.clone(), count))
        })
        .collect()
}

#[pyfunction]
fn mp_moments(alpha: f64, kmax: u32) -> PyResult<Vec<f64>> {
    Ok(limitlaw::mp_moments(alpha, kmax).py_err()?.moments)
}

#[pyfunction]
fn perturb_moments(alpha: f64, kmax: u32) -> PyResult<Vec<f64>> {
    limitlaw::perturb_moments(alpha, kmax).py_err()
}

#[pyfunction]
fn mp_density(x: f64, alpha: f64) -> f64 {
    limitlaw::mp_density(x, alpha)
}

#[pyfunction]
fn mp_atom(alpha: f64) -> f64 {
    limitlaw::mp_atom(alpha)
}

#[pyfunction]
fn perturb_density(x: f64, alpha: f64) -> f64 {
    limitlaw::perturb_density(x, alpha)
}

#[pyfunction]
fn mp_stieltjes(z: Complex64, alpha: f64) -> PyResult<Complex64> {
    limitlaw::mp_stieltjes(z, alpha).py_err()
}

#[pyfunction]
fn perturb_stieltjes(z: Complex64, alpha: f64) -> PyResult<Complex64> {
    limitlaw::perturb_stieltjes(z, alpha).py_err()
}

/// Limit moments `M_1..M_kmax` for an arbitrary sequence `[A_2, A_3, ...]`.
#[pyfunction]
#[pyo3(signature = (a_values, alpha, kmax, guard = DEFAULT_GUARD))]
fn limit_moments(py: Python<'_>, a_values: Vec<f64>, alpha: f64, kmax: u32, guard: u32) -> PyResult<Vec<f64>> {
    py.detach(|| {
        let seq = limitlaw::AsymptoticSequence::new(a_values, 0.0)?;
        limitlaw::limit_moments(&seq, alpha, kmax, &tables(guard)).map(|m| m.moments)
    })
    .py_err()
}

#[pyfunction]
#[pyo3(signature = (params, kmax, guard = DEFAULT_GUARD))]
fn bernoulli_moments(py: Python<'_>, params: PyBernoulliParams, kmax: u32, guard: u32) -> PyResult<Vec<f64>> {
    py.detach(|| bern::bernoulli_moments(&params.0, kmax, &tables(guard)))
        .py_err()
        .map(|m| m.moments)
}

#[pyfunction]
#[pyo3(signature = (params, k, guard = DEFAULT_GUARD))]
fn expansion_residual(py: Python<'_>, params: PyBernoulliParams, k: u32, guard: u32) -> PyResult<f64> {
    py.detach(|| bern::expansion_residual(&params.0, k, &tables(guard))).py_err()
}

/// `(density, stderr)` of the Bernoulli limit law at `x > 0`.
#[pyfunction]
#[pyo3(signature = (params, x, epsilon = None, pool_size = 100_000, sweeps = 200, seed = 0))]
fn popdyn_density(
    py: Python<'_>,
    params: PyBernoulliParams,
    x: f64,
    epsilon: Option<f64>,
    pool_size: usize,
    sweeps: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let cfg = bern::PopdynConfig {
        pool_size,
        sweeps,
        seed,
        ..Default::default()
    };
    py.detach(|| bern::popdyn_wishart_density(&params.0, x, epsilon, &cfg)).py_err()
}

/// `(m, stderr, converged)` for the Stieltjes transform of the Bernoulli law at `z`.
#[pyfunction]
#[pyo3(signature = (params, z, pool_size = 100_000, sweeps = 200, seed = 0))]
fn popdyn_stieltjes(
    py: Python<'_>,
    params: PyBernoulliParams,
    z: Complex64,
    pool_size: usize,
    sweeps: usize,
    seed: u64,
) -> PyResult<(Complex64, f64, bool)> {
    let cfg = bern::PopdynConfig {
        pool_size,
        sweeps,
        seed,
        ..Default::default()
    };
    let (m, r) = py.detach(|| bern::popdyn_wishart_stieltjes(&params.0, z, &cfg)).py_err()?;
    Ok((m, r.stderr, r.converged))
}

#[pyfunction]
fn heavy_a(params: PyHeavyTailParams, kmax: u32) -> PyResult<Vec<f64>> {
    Ok(heavy::heavy_a(&params.0, kmax).py_err()?.iter().map(|(_, v)| v).collect())
}

#[pyfunction]
#[pyo3(signature = (params, kmax, guard = DEFAULT_GUARD))]
fn heavy_moments(py: Python<'_>, params: PyHeavyTailParams, kmax: u32, guard: u32) -> PyResult<Vec<f64>> {
    py.detach(|| heavy::heavy_moments(&params.0, kmax, &tables(guard)))
        .py_err()
        .map(|m| m.moments)
}

/// Small-`B` comparison as a dict with keys `lhs`, `rhs_A4`, `rhs_theorem`, `ratio`.
#[pyfunction]
#[pyo3(signature = (params, k, guard = DEFAULT_GUARD))]
fn expansion_check<'py>(py: Python<'py>, params: PyHeavyTailParams, k: u32, guard: u32) -> PyResult<Bound<'py, PyDict>> {
    let cache = tables(guard);
    let e = py.detach(|| heavy::expansion_check(&params.0, k, &cache)).py_err()?;
    let d = PyDict::new(py);
    d.set_item("beta", e.beta)?;
    d.set_item("B", e.b)?;
    d.set_item("alpha", e.alpha)?;
    d.set_item("k", e.k)?;
    d.set_item("lhs", e.lhs)?;
    d.set_item("rhs_A4", e.rhs_a4)?;
    d.set_item("rhs_theorem", e.rhs_theorem)?;
    d.set_item("ratio", e.ratio)?;
    d.set_item("warning", e.warning)?;
    Ok(d)
}

#[pyfunction]
fn truncated_moment(params: PyHeavyTailParams, n: usize, k: u32) -> PyResult<f64> {
    heavy::truncated_moment(&params.0, n, k).py_err()
}

#[pyfunction]
fn sample_truncated(py: Python<'_>, params: PyHeavyTailParams, n: usize, count: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| heavy::sample_truncated(&params.0, n, count, seed)).py_err()
}

#[pyfunction]
fn sample_wishart_bernoulli(py: Python<'_>, n: usize, params: PyBernoulliParams, seed: u64) -> PyResult<PySpectralSample> {
    py.detach(|| spectra::sample_wishart_bernoulli(n, &params.0, seed))
        .py_err()
        .map(PySpectralSample)
}

#[pyfunction]
fn sample_wishart_heavy(py: Python<'_>, n: usize, params: PyHeavyTailParams, seed: u64) -> PyResult<PySpectralSample> {
    py.detach(|| spectra::sample_wishart_heavy(n, &params.0, seed))
        .py_err()
        .map(PySpectralSample)
}

/// Runs a self-check suite by name; returns `(passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (suite, seed = 0, n = None, trials = None))]
fn run_check(py: Python<'_>, suite: &str, seed: u64, n: Option<usize>, trials: Option<usize>) -> PyResult<(bool, String)> {
    let suite: checks::Suite = suite.parse().py_err()?;
    let opts = checks::CheckOptions {
        seed,
        n,
        trials,
        ..Default::default()
    };
    let cache = TableCache::default();
    let r = py.detach(|| checks::run_suite(suite, &opts, &cache)).py_err()?;
    Ok((r.passed(), r.to_string()))
}

#[pymodule]
pub fn wishart_spectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ResourceLimitError", m.py().get_type::<ResourceLimitError>())?;
    m.add_class::<PyBernoulliParams>()?;
    m.add_class::<PyHeavyTailParams>()?;
    m.add_class::<PySpectralSample>()?;
    m.add_function(wrap_pyfunction!(count_table, m)?)?;
    m.add_function(wrap_pyfunction!(mp_moments, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_moments, m)?)?;
    m.add_function(wrap_pyfunction!(mp_density, m)?)?;
    m.add_function(wrap_pyfunction!(mp_atom, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_density, m)?)?;
    m.add_function(wrap_pyfunction!(mp_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(limit_moments, m)?)?;
    m.add_function(wrap_pyfunction!(bernoulli_moments, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_residual, m)?)?;
    m.add_function(wrap_pyfunction!(popdyn_density, m)?)?;
    m.add_function(wrap_pyfunction!(popdyn_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(heavy_a, m)?)?;
    m.add_function(wrap_pyfunction!(heavy_moments, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_check, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_moment, m)?)?;
    m.add_function(wrap_pyfunction!(sample_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(sample_wishart_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(sample_wishart_heavy, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    Ok(())
}
