//! Python bindings for `geoball`.

use geoball::bounds::{self, BoundsInput};
use geoball::eigensolve::{self, EigenPair, SolveConfig};
use geoball::model::{self, Table};
use geoball::momentum;
use geoball::series::{self, Multiplicity};
use geoball::Error;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(m) => PyOSError::new_err(m),
        Error::Consistency(_) | Error::DegenerateStart(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn multiplicity(mode: &str) -> PyResult<Multiplicity> {
    match mode {
        "paper" => Ok(Multiplicity::Paper),
        "sphere" => Ok(Multiplicity::Sphere),
        "none" => Ok(Multiplicity::None),
        _ => Err(PyValueError::new_err(format!(
            "multiplicity must be 'paper', 'sphere' or 'none', got {mode:?}"
        ))),
    }
}

#[pyclass(name = "WarpingFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWarping(geoball::WarpingFunction);

#[pymethods]
impl PyWarping {
    #[staticmethod]
    fn euclidean() -> Self {
        Self(geoball::WarpingFunction::euclidean())
    }

    #[staticmethod]
    #[pyo3(signature = (curvature = 1.0))]
    fn hyperbolic(curvature: f64) -> PyResult<Self> {
        geoball::WarpingFunction::hyperbolic(curvature)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (curvature = 1.0))]
    fn spherical(curvature: f64) -> PyResult<Self> {
        geoball::WarpingFunction::spherical(curvature)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn cubic_exp() -> Self {
        Self(geoball::WarpingFunction::cubic_exp())
    }

    /// Monotone-cubic interpolation of sampled `(t, h)` pairs.
    #[staticmethod]
    fn tabulated(t: Vec<f64>, h: Vec<f64>) -> PyResult<Self> {
        let table = Table::new(t, h).map_err(to_py)?;
        Ok(Self(geoball::WarpingFunction::tabulated(table)))
    }

    /// Reads a `t,h` CSV file.
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let table = Table::from_csv_path(path).map_err(to_py)?;
        Ok(Self(geoball::WarpingFunction::tabulated(table)))
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn h(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        match self.0.curvature() {
            Some(k) => format!("WarpingFunction.{}({k})", self.0.name()),
            None => format!("WarpingFunction<{}>", self.0.name()),
        }
    }
}

#[pyclass(name = "BallGeometry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry(geoball::BallGeometry);

#[pymethods]
impl PyGeometry {
    #[new]
    fn new(dim: usize, radius: f64, warping: &PyWarping) -> PyResult<Self> {
        geoball::BallGeometry::new(dim, radius, warping.0.clone())
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    fn volume(&self, s: f64) -> PyResult<f64> {
        self.0.volume(s).map_err(to_py)
    }

    fn boundary_area(&self, s: f64) -> PyResult<f64> {
        self.0.boundary_area(s).map_err(to_py)
    }

    /// `∫_0^r V/S`, which equals the sum of the reciprocal radial eigenvalues.
    fn vs_integral(&self) -> f64 {
        self.0.vs_integral()
    }

    fn __repr__(&self) -> String {
        format!(
            "BallGeometry(dim={}, radius={}, warping={})",
            self.0.dim(),
            self.0.radius(),
            self.0.warping().name()
        )
    }
}

#[pyclass(name = "EigenPair", frozen)]
struct PyEigenPair {
    #[pyo3(get)]
    eigenvalue: f64,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    ratio_history: Vec<f64>,
    #[pyo3(get)]
    nodes: Vec<f64>,
    #[pyo3(get)]
    eigenfunction: Vec<f64>,
}

impl From<EigenPair> for PyEigenPair {
    fn from(p: EigenPair) -> Self {
        Self {
            eigenvalue: p.lambda,
            residual: p.residual,
            iterations: p.iterations,
            converged: p.converged,
            ratio_history: p.ratio_history,
            nodes: p.eigenfunction.grid().nodes().to_vec(),
            eigenfunction: p.eigenfunction.into_values(),
        }
    }
}

#[pymethods]
impl PyEigenPair {
    fn __repr__(&self) -> String {
        format!(
            "EigenPair(eigenvalue={}, residual={:.2e}, iterations={}, converged={})",
            self.eigenvalue, self.residual, self.iterations, self.converged
        )
    }
}

fn solve_config(tol: f64, max_iter: usize, grid: usize) -> PyResult<SolveConfig> {
    let cfg = SolveConfig {
        tol,
        max_iter,
        grid,
        ..SolveConfig::default()
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// The first `count` radial eigenpairs of a model ball.
#[pyfunction]
#[pyo3(signature = (geometry, count, tol = 1e-10, max_iter = 500, grid = 4096))]
fn radial_spectrum(
    py: Python<'_>,
    geometry: &PyGeometry,
    count: usize,
    tol: f64,
    max_iter: usize,
    grid: usize,
) -> PyResult<Vec<PyEigenPair>> {
    let cfg = solve_config(tol, max_iter, grid)?;
    let geom = geometry.0.clone();
    let pairs = py
        .detach(move || eigensolve::radial_spectrum(&geom, count, &cfg))
        .map_err(to_py)?;
    Ok(pairs.into_iter().map(Into::into).collect())
}

/// The first `count` eigenpairs of the `ν_l`-spectrum of the Euclidean ball.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (dim, radius, l, count, tol = 1e-10, max_iter = 500, grid = 4096))]
fn l_spectrum_euclid(
    py: Python<'_>,
    dim: usize,
    radius: f64,
    l: usize,
    count: usize,
    tol: f64,
    max_iter: usize,
    grid: usize,
) -> PyResult<Vec<PyEigenPair>> {
    let cfg = solve_config(tol, max_iter, grid)?;
    let pairs = py
        .detach(move || eigensolve::l_spectrum_euclid(dim, radius, l, count, &cfg))
        .map_err(to_py)?;
    Ok(pairs.into_iter().map(Into::into).collect())
}

fn series_dict<'py>(py: Python<'py>, rep: &series::SeriesReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("closed_form", rep.closed_form)?;
    d.set_item("partial_sum", rep.partial_sum)?;
    d.set_item("terms_used", rep.terms_used)?;
    d.set_item("tail_bound", rep.tail_bound)?;
    d.set_item("diverges", rep.diverges)?;
    Ok(d)
}

/// Whole-spectrum `Σ 1/λ²` of the Euclidean ball, summed over `l <= lmax`.
#[pyfunction]
#[pyo3(signature = (dim, radius, multiplicity = "paper", lmax = 200))]
fn whole_spectrum_sum_sq<'py>(
    py: Python<'py>,
    dim: usize,
    radius: f64,
    multiplicity: &str,
    lmax: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = series::whole_spectrum_sum_sq(dim, radius, self::multiplicity(multiplicity)?, lmax)
        .map_err(to_py)?;
    series_dict(py, &rep)
}

/// `Σ_{i<=count} 1/λ_i` next to `∫_0^r V/S`.
#[pyfunction]
#[pyo3(signature = (geometry, count = 10))]
fn radial_harmonic_identity<'py>(
    py: Python<'py>,
    geometry: &PyGeometry,
    count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let geom = geometry.0.clone();
    let rep = py
        .detach(move || series::radial_harmonic_identity(&geom, count, &SolveConfig::default()))
        .map_err(to_py)?;
    series_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (dim, radius, l, power = 2))]
fn euclid_sum_l(dim: usize, radius: f64, l: usize, power: u32) -> PyResult<f64> {
    series::euclid_sum_l(dim, radius, l, power).map_err(to_py)
}

/// `λ_{l,k} >= 2k(m+2l)/r²`.
#[pyfunction]
fn lower_bound(dim: usize, radius: f64, l: usize, k: usize) -> PyResult<f64> {
    series::lower_bound_cor22(dim, radius, l, k).map_err(to_py)
}

/// λ₁ and the λ₂ estimate from the exit-moment hierarchy.
#[pyfunction]
#[pyo3(signature = (geometry, k_max = 40))]
fn moment_limits<'py>(
    py: Python<'py>,
    geometry: &PyGeometry,
    k_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let geom = geometry.0.clone();
    let (seq, l1, l2) = py
        .detach(move || -> geoball::Result<_> {
            let cfg = SolveConfig::default();
            let seq = momentum::solve_hierarchy(&geom, k_max, &cfg)?;
            let l1 = momentum::lambda1_from_moments(&seq)?;
            let l2 = momentum::lambda2_bound_from_moments(&seq, l1.lambda1)?;
            Ok((seq, l1, l2))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("torsional_rigidity", seq.torsional_rigidity())?;
    d.set_item("lambda1", l1.lambda1)?;
    d.set_item("lambda1_history", l1.history)?;
    d.set_item("lambda2", l2.lambda2)?;
    d.set_item("lambda2_reliable", l2.reliable)?;
    d.set_item("ln_b", (0..=k_max).map(|k| seq.ln_b(k)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Lower and upper bounds on `Σ 1/λ²` for an extrinsic minimal ball.
#[pyfunction]
#[pyo3(signature = (dim, radius, volume = None, ends = None))]
fn sum_sq_bounds<'py>(
    py: Python<'py>,
    dim: usize,
    radius: f64,
    volume: Option<f64>,
    ends: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = bounds::bounds(&BoundsInput {
        m: dim,
        r: radius,
        vol: volume,
        ends,
    })
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lower", rep.lower)?;
    d.set_item("upper", rep.upper)?;
    d.set_item("a_m", rep.a_m)?;
    d.set_item("b_m", rep.b_m)?;
    d.set_item("zeta", rep.zeta)?;
    d.set_item("warnings", rep.warnings)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (dim, volume, k = 1))]
fn cly_lower_bound(dim: usize, volume: f64, k: usize) -> PyResult<f64> {
    bounds::cly_lower_bound(dim, volume, k).map_err(to_py)
}

#[pyfunction]
fn zeta(s: f64) -> PyResult<f64> {
    bounds::zeta(s).map_err(to_py)
}

/// Heuristic stochastic-completeness verdict from `∫_0^R V/S` at doubling `R`.
#[pyfunction]
fn stochastic_diagnostic<'py>(
    py: Python<'py>,
    warping: &PyWarping,
    dim: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = model::stochastic_diagnostic(&warping.0, dim).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{:?}", rep.verdict))?;
    d.set_item("radii", rep.radii)?;
    d.set_item("partial_integrals", rep.partial_integrals)?;
    Ok(d)
}

#[pymodule]
pub fn pygeoball(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWarping>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyEigenPair>()?;
    m.add_function(wrap_pyfunction!(radial_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(l_spectrum_euclid, m)?)?;
    m.add_function(wrap_pyfunction!(whole_spectrum_sum_sq, m)?)?;
    m.add_function(wrap_pyfunction!(radial_harmonic_identity, m)?)?;
    m.add_function(wrap_pyfunction!(euclid_sum_l, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(moment_limits, m)?)?;
    m.add_function(wrap_pyfunction!(sum_sq_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(cly_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_diagnostic, m)?)?;
    Ok(())
}
