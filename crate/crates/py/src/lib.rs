//! Python module `maisac_py`: scenario configuration, the alternating
//! optimizer, and the beampattern / gain-map helpers.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use maisac::ao_pipeline::{self, AoConfig, Scheme};
use maisac::bench;
use maisac::channel_model::{linear_to_db, sample_realization, Position2D, ScenarioConfig, ScenarioRealization};
use maisac::CVector;

create_exception!(maisac_py, InfeasibleError, PyRuntimeError, "Communication thresholds cannot be met.");

fn py_err(e: maisac::Error) -> PyErr {
    use maisac::Error as E;
    match e {
        E::InvalidConfig(_) | E::Parse(_) | E::RegionTooSmall(_) => PyValueError::new_err(e.to_string()),
        E::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn points(ps: &[Position2D]) -> Vec<(f64, f64)> {
    ps.iter().map(|p| (p.x, p.y)).collect()
}

fn schemes(names: &[String]) -> PyResult<Vec<Scheme>> {
    names.iter().map(|s| s.parse::<Scheme>().map_err(py_err)).collect()
}

/// Scenario parameters. Powers and thresholds are in dB / dBm.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
pub struct PyConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self { inner: ScenarioConfig::default() }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_toml_str(text).map(|inner| Self { inner }).map_err(py_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    #[getter]
    fn n_tx(&self) -> usize {
        self.inner.n_tx
    }

    #[setter]
    fn set_n_tx(&mut self, v: usize) {
        self.inner.n_tx = v;
    }

    #[getter]
    fn n_rx(&self) -> usize {
        self.inner.n_rx
    }

    #[setter]
    fn set_n_rx(&mut self, v: usize) {
        self.inner.n_rx = v;
    }

    #[getter]
    fn max_power_dbm(&self) -> f64 {
        self.inner.max_power_dbm
    }

    #[setter]
    fn set_max_power_dbm(&mut self, v: f64) {
        self.inner.max_power_dbm = v;
    }

    #[getter]
    fn gamma_th_db(&self) -> Vec<f64> {
        self.inner.gamma_th_db.clone()
    }

    #[setter]
    fn set_gamma_th_db(&mut self, v: Vec<f64>) {
        self.inner.gamma_th_db = v;
    }

    #[getter]
    fn region_side_wavelengths(&self) -> f64 {
        self.inner.region_side_wavelengths
    }

    #[setter]
    fn set_region_side_wavelengths(&mut self, v: f64) {
        self.inner.region_side_wavelengths = v;
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(n_tx={}, n_rx={}, users={}, max_power_dbm={})",
            self.inner.n_tx,
            self.inner.n_rx,
            self.inner.num_users(),
            self.inner.max_power_dbm
        )
    }
}

/// Result of one optimizer run.
#[pyclass(name = "Solution")]
pub struct PySolution {
    inner: ao_pipeline::Solution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.name()
    }

    #[getter]
    fn sensing_sinr(&self) -> f64 {
        self.inner.sensing_sinr
    }

    #[getter]
    fn sensing_sinr_db(&self) -> f64 {
        linear_to_db(self.inner.sensing_sinr)
    }

    #[getter]
    fn comm_sinrs(&self) -> Vec<f64> {
        self.inner.comm_sinrs.clone()
    }

    #[getter]
    fn tx_positions(&self) -> Vec<(f64, f64)> {
        points(&self.inner.layout.tx)
    }

    #[getter]
    fn rx_positions(&self) -> Vec<(f64, f64)> {
        points(&self.inner.layout.rx)
    }

    /// One list per transmit beam.
    #[getter]
    fn tx_beams(&self) -> Vec<Vec<Complex64>> {
        self.inner.beams.tx.iter().map(|w| w.iter().copied().collect()).collect()
    }

    #[getter]
    fn rx_filter(&self) -> Vec<Complex64> {
        self.inner.beams.rx.iter().copied().collect()
    }

    #[getter]
    fn total_power(&self) -> f64 {
        self.inner.beams.total_power()
    }

    #[getter]
    fn objective_trace(&self) -> Vec<f64> {
        self.inner.objective_trace.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    fn trace_text(&self) -> String {
        self.inner.trace_to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(scheme={}, sensing_sinr_db={:.3}, iterations={}, converged={})",
            self.inner.scheme,
            linear_to_db(self.inner.sensing_sinr),
            self.inner.iterations,
            self.inner.converged
        )
    }
}

fn realization(config: &PyConfig, seed: u64) -> PyResult<ScenarioRealization> {
    sample_realization(&config.inner, seed).map_err(py_err)
}

/// Runs the optimizer for one scheme on the realization drawn from `seed`.
#[pyfunction]
#[pyo3(signature = (config, seed, scheme = "proposed", iter_max = 30, sigma = 1e-3))]
fn run(py: Python<'_>, config: &PyConfig, seed: u64, scheme: &str, iter_max: usize, sigma: f64) -> PyResult<PySolution> {
    let scheme: Scheme = scheme.parse().map_err(py_err)?;
    let real = realization(config, seed)?;
    let ao = AoConfig { iter_max, sigma, ..AoConfig::default() }.with_scheme(scheme);
    ao.validate().map_err(py_err)?;
    let cfg = config.inner.clone();
    py.detach(move || ao_pipeline::run_algorithm1(&real, &cfg, &ao))
        .map(|inner| PySolution { inner })
        .map_err(py_err)
}

/// Runs several schemes on one shared realization, warm-started so that
/// movable schemes never fall below the fixed arrays.
#[pyfunction]
#[pyo3(signature = (config, seed, schemes = vec!["proposed".into(), "receive-ma".into(), "transmit-ma".into(), "fpa".into()]))]
fn compare(py: Python<'_>, config: &PyConfig, seed: u64, schemes: Vec<String>) -> PyResult<Vec<PySolution>> {
    let list = self::schemes(&schemes)?;
    let real = realization(config, seed)?;
    let cfg = config.inner.clone();
    let sols = py.detach(move || ao_pipeline::compare_schemes(&real, &cfg, &AoConfig::default(), &list)).map_err(py_err)?;
    Ok(sols.into_iter().map(|inner| PySolution { inner }).collect())
}

/// `(sensing_sinr, comm_sinrs, total_power, violations)`.
type Evaluated = (f64, Vec<f64>, f64, Vec<(String, f64)>);
/// `(xs, ys, rows)`.
type GainRows = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Recomputes every SINR and lists constraint violations as `(name, amount)`.
#[pyfunction]
fn evaluate(config: &PyConfig, seed: u64, solution: &PySolution) -> PyResult<Evaluated> {
    let real = realization(config, seed)?;
    let ev = ao_pipeline::evaluate_solution(&solution.inner, &real, &config.inner).map_err(py_err)?;
    let violations = ev.violations.into_iter().map(|v| (v.constraint, v.amount)).collect();
    Ok((ev.sensing_sinr, ev.comm_sinrs, ev.total_power, violations))
}

#[pyfunction]
fn elevation_grid(count: usize) -> Vec<f64> {
    bench::elevation_grid(count)
}

/// Transmit array gain `|a(theta)^T w|^2` summed over beams at each elevation.
#[pyfunction]
#[pyo3(signature = (positions, beams, elevations, azimuth, wavelength, normalize = false))]
fn beampattern(
    positions: Vec<(f64, f64)>,
    beams: Vec<Vec<Complex64>>,
    elevations: Vec<f64>,
    azimuth: f64,
    wavelength: f64,
    normalize: bool,
) -> PyResult<Vec<f64>> {
    let req = bench::BeampatternRequest {
        elevations,
        azimuth,
        positions: positions.into_iter().map(|(x, y)| Position2D::new(x, y)).collect(),
        beams: beams.into_iter().map(CVector::from_vec).collect(),
        wavelength,
        normalize,
    };
    Ok(bench::beampattern(&req).map_err(py_err)?.into_iter().map(|p| p.gain).collect())
}

/// Target-echo power over the receive region: `(xs, ys, rows)` with one row per y.
#[pyfunction]
#[pyo3(signature = (config, seed, resolution = 61))]
fn gain_map(config: &PyConfig, seed: u64, resolution: usize) -> PyResult<GainRows> {
    let real = realization(config, seed)?;
    let cfg = &config.inner;
    let map = bench::channel_gain_map(resolution, &real.target.rx_paths, cfg.wavelength, &cfg.rx_region()).map_err(py_err)?;
    let rows = (0..map.ys.len()).map(|iy| (0..map.xs.len()).map(|ix| map.at(ix, iy)).collect()).collect();
    Ok((map.xs, map.ys, rows))
}

/// Quick invariant checks as `(name, passed, detail)`.
#[pyfunction]
fn selftest(py: Python<'_>, config: &PyConfig) -> PyResult<Vec<(String, bool, String)>> {
    let cfg = config.inner.clone();
    let checks = py.detach(move || bench::selftest(&cfg)).map_err(py_err)?;
    Ok(checks.into_iter().map(|c| (c.name.to_string(), c.passed, c.detail)).collect())
}

#[pymodule]
fn maisac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySolution>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(elevation_grid, m)?)?;
    m.add_function(wrap_pyfunction!(beampattern, m)?)?;
    m.add_function(wrap_pyfunction!(gain_map, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
