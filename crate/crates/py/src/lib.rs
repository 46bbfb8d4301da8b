//! Python module `risim`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use risim_core::conventional::{self, OneBitMode, PhaseConfiguration};
use risim_core::dipole::{self, DipoleSpec};
use risim_core::geometry::{ArrayLayout, PlaneWaveDirection};
use risim_core::impedance::Coupling;
use risim_core::pattern::{self as pat, PatternGrid};
use risim_core::pipeline::{self, RisConfiguration};
use risim_core::scenario::{self, ScenarioConfig};

fn py_err(e: risim_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn direction(az: f64, el: f64) -> PyResult<PlaneWaveDirection> {
    PlaneWaveDirection::new(az, el).map_err(py_err)
}

#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        scenario::parse_scenario(text).map(|inner| Self { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        scenario::load_scenario(&path).map(|inner| Self { inner }).map_err(py_err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(py_err)
    }

    /// Copy with a different grid step and/or coupling, re-validated.
    #[pyo3(signature = (grid_step=None, coupling=None))]
    fn with_overrides(&self, grid_step: Option<f64>, coupling: Option<&str>) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        if let Some(step) = grid_step {
            inner.grid.step_deg = step;
        }
        if let Some(c) = coupling {
            inner.coupling = match c {
                "full" => Coupling::Full,
                "diagonal" => Coupling::Diagonal,
                other => return Err(PyValueError::new_err(format!("unknown coupling {other:?}"))),
            };
        }
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength()
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model.as_str()
    }

    #[getter]
    fn quantization(&self) -> &'static str {
        self.inner.quantization.as_str()
    }

    #[getter]
    fn n_elements(&self) -> usize {
        self.inner.layout.n_x * self.inner.layout.n_z
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, model={:?})", self.inner.name, self.inner.model.as_str())
    }
}

#[pyclass(name = "Pattern", skip_from_py_object)]
struct PyPattern {
    inner: PatternGrid,
}

#[pymethods]
impl PyPattern {
    #[getter]
    fn azimuths_deg(&self) -> Vec<f64> {
        self.inner.azimuths_deg.clone()
    }

    #[getter]
    fn elevations_deg(&self) -> Vec<f64> {
        self.inner.elevations_deg.clone()
    }

    /// Row-major levels in dB, elevation outer.
    #[getter]
    fn values_db(&self) -> Vec<f64> {
        self.inner.values_db.clone()
    }

    #[getter]
    fn reference_db(&self) -> f64 {
        self.inner.reference_db
    }

    fn value(&self, az_index: usize, el_index: usize) -> PyResult<f64> {
        if az_index >= self.inner.azimuths_deg.len() || el_index >= self.inner.elevations_deg.len() {
            return Err(PyValueError::new_err("grid index out of range"));
        }
        Ok(self.inner.value(az_index, el_index))
    }

    /// `(azimuth_deg, elevation_deg, level_db)` of the grid maximum.
    fn peak(&self) -> (f64, f64, f64) {
        let (d, v) = self.inner.peak();
        (d.azimuth_deg, d.elevation_deg, v)
    }
}

#[pyclass(name = "LobeReport", skip_from_py_object)]
struct PyLobeReport {
    inner: pat::LobeReport,
}

#[pymethods]
impl PyLobeReport {
    /// `(azimuth_deg, elevation_deg, level_db)`.
    #[getter]
    fn intended(&self) -> (f64, f64, f64) {
        let l = self.inner.intended;
        (l.direction.azimuth_deg, l.direction.elevation_deg, l.level_db)
    }

    #[getter]
    fn specular(&self) -> (f64, f64, f64) {
        let l = self.inner.specular;
        (l.direction.azimuth_deg, l.direction.elevation_deg, l.level_db)
    }

    /// `(azimuth_deg, elevation_deg, level_db, present)`.
    #[getter]
    fn mirror(&self) -> (f64, f64, f64, bool) {
        let l = self.inner.mirror;
        (l.direction.azimuth_deg, l.direction.elevation_deg, l.level_db, l.present)
    }

    #[getter]
    fn gap_structural_minus_intended(&self) -> f64 {
        self.inner.gap_structural_minus_intended
    }

    fn __repr__(&self) -> String {
        format!(
            "LobeReport(intended={:?}, specular={:?}, mirror={:?}, gap={:.3})",
            self.intended(),
            self.specular(),
            self.mirror(),
            self.inner.gap_structural_minus_intended
        )
    }
}

#[pyclass(name = "Optimized", get_all, skip_from_py_object)]
struct PyOptimized {
    phases: Vec<f64>,
    capacitances: Option<Vec<f64>>,
    loads: Vec<Complex64>,
    optimizer: String,
    quantizer: String,
}

#[pyclass(name = "Scene", skip_from_py_object)]
struct PyScene {
    inner: pipeline::Scene,
}

fn evaluation(e: pipeline::Evaluation) -> (PyPattern, PyLobeReport) {
    (PyPattern { inner: e.pattern }, PyLobeReport { inner: e.report })
}

#[pymethods]
impl PyScene {
    #[new]
    fn new(scenario: &PyScenario) -> PyResult<Self> {
        pipeline::Scene::new(&scenario.inner).map(|inner| Self { inner }).map_err(py_err)
    }

    fn optimize(&self) -> PyResult<PyOptimized> {
        let o = self.inner.optimize().map_err(py_err)?;
        Ok(PyOptimized {
            phases: o.phases,
            capacitances: o.capacitances,
            loads: o.loads,
            optimizer: o.optimizer,
            quantizer: o.quantizer,
        })
    }

    fn evaluate_loads(&self, loads: Vec<Complex64>) -> PyResult<(PyPattern, PyLobeReport)> {
        self.inner.evaluate_loads(&loads).map(evaluation).map_err(py_err)
    }

    /// Binary states: `True` is the π state.
    fn evaluate_states(&self, states: Vec<bool>) -> PyResult<(PyPattern, PyLobeReport)> {
        self.inner
            .evaluate(&RisConfiguration::BinaryStates(states))
            .map(evaluation)
            .map_err(py_err)
    }

    fn evaluate_phases(&self, phases: Vec<f64>) -> PyResult<(PyPattern, PyLobeReport)> {
        self.inner
            .evaluate(&RisConfiguration::Phases(phases))
            .map(evaluation)
            .map_err(py_err)
    }

    fn evaluate_matched(&self) -> PyResult<(PyPattern, PyLobeReport)> {
        self.inner.evaluate_matched().map(evaluation).map_err(py_err)
    }

    fn conventional_gain(&self, phases: Vec<f64>) -> PyResult<f64> {
        self.inner.conventional_gain(&phases).map_err(py_err)
    }

    fn impedance_gain(&self, loads: Vec<Complex64>) -> PyResult<f64> {
        self.inner.impedance_gain(&loads).map_err(py_err)
    }

    fn z_ss(&self) -> Vec<Vec<Complex64>> {
        let z = &self.inner.imps.z_ss;
        (0..z.nrows()).map(|i| (0..z.ncols()).map(|j| z[(i, j)]).collect()).collect()
    }

    #[getter]
    fn g(&self) -> Vec<Complex64> {
        self.inner.g.clone()
    }

    #[getter]
    fn h(&self) -> Vec<Complex64> {
        self.inner.h.clone()
    }

    #[getter]
    fn reference_db(&self) -> f64 {
        self.inner.reference_db
    }

    #[getter]
    fn series_reactance_ohm(&self) -> f64 {
        self.inner.load_model.series_reactance
    }
}

#[pyfunction]
fn steering_vector(n_x: usize, n_z: usize, delta: f64, azimuth_deg: f64, elevation_deg: f64) -> PyResult<Vec<Complex64>> {
    let layout = ArrayLayout::new(n_x, n_z, delta, 1.0).map_err(py_err)?;
    conventional::steering_vector(&layout, &direction(azimuth_deg, elevation_deg)?).map_err(py_err)
}

#[pyfunction]
fn optimal_phases(g: Vec<Complex64>, h: Vec<Complex64>) -> PyResult<Vec<f64>> {
    conventional::optimal_phases(&g, &h).map(|c| c.phases).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (g, h, mode="nearest"))]
fn quantize_1bit(g: Vec<Complex64>, h: Vec<Complex64>, mode: &str) -> PyResult<Vec<f64>> {
    let mode = match mode {
        "nearest" => OneBitMode::Nearest,
        "sweep" => OneBitMode::Sweep,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    conventional::quantize_1bit(&g, &h, mode).map(|c| c.phases).map_err(py_err)
}

#[pyfunction]
fn received_gain(h: Vec<Complex64>, g: Vec<Complex64>, phases: Vec<f64>) -> PyResult<Complex64> {
    conventional::received_gain(&h, &g, &PhaseConfiguration::new(phases)).map_err(py_err)
}

/// Induced-EMF mutual impedance between two parallel z-directed dipoles.
#[pyfunction]
fn mutual_impedance(
    p: [f64; 3],
    q: [f64; 3],
    length: f64,
    radius: f64,
    wavelength: f64,
) -> PyResult<Complex64> {
    let a = DipoleSpec::new(p, length, radius).map_err(py_err)?;
    let b = DipoleSpec::new(q, length, radius).map_err(py_err)?;
    dipole::mutual_impedance(&a, &b, wavelength).map_err(py_err)
}

/// Runs a scenario and returns its summary as a JSON string.
#[pyfunction]
#[pyo3(signature = (scenario, out_dir=None))]
fn run_scenario(scenario: &PyScenario, out_dir: Option<PathBuf>) -> PyResult<String> {
    let a = pipeline::run_scenario(&scenario.inner, out_dir.as_deref()).map_err(py_err)?;
    serde_json::to_string(&a.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs every scenario under `out_root` and returns the comparison rows as JSON.
#[pyfunction]
fn run_sweep(scenarios: Vec<PyScenario>, out_root: PathBuf) -> PyResult<String> {
    let configs: Vec<ScenarioConfig> = scenarios.into_iter().map(|s| s.inner).collect();
    let rows = pipeline::run_sweep(&configs, &out_root).map_err(py_err)?;
    serde_json::to_string(&rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn risim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyLobeReport>()?;
    m.add_class::<PyOptimized>()?;
    m.add_function(wrap_pyfunction!(steering_vector, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_phases, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_1bit, m)?)?;
    m.add_function(wrap_pyfunction!(received_gain, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_impedance, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
