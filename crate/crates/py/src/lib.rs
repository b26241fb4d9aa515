//! Python bindings: motor parameters, training, weight files, scenarios,
//! simulation and the benchmark suite.

use std::path::PathBuf;

use pmsm_adp::basis::WeightSet;
use pmsm_adp::motor::MotorParams;
use pmsm_adp::sim::{
    itae, realized_cost, reproduce_paper_suite, run_scenario_with, trace_metrics, Profile, Scenario, Signal, SimTrace,
    SuiteConfig, CSV_COLUMNS,
};
use pmsm_adp::trainer::{bellman_residual, sample_box as core_sample_box, value_iteration, CostSpec, TrainingConfig};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString};
use serde_json::Value;

fn to_py_err(e: pmsm_adp::Error) -> PyErr {
    use pmsm_adp::Error as E;
    match e {
        E::Io { .. } => PyIOError::new_err(e.to_string()),
        E::Invalid { .. } | E::Parse { .. } | E::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn py_to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        return Ok(Value::Null);
    }
    if obj.is_instance_of::<PyBool>() {
        return Ok(Value::Bool(obj.extract()?));
    }
    if obj.is_instance_of::<PyInt>() {
        return Ok(Value::from(obj.extract::<i64>()?));
    }
    if obj.is_instance_of::<PyFloat>() {
        let x: f64 = obj.extract()?;
        return serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| PyValueError::new_err("non-finite numbers are not accepted"));
    }
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(Value::String(s.to_str()?.to_owned()));
    }
    if let Ok(d) = obj.cast::<PyDict>() {
        let mut map = serde_json::Map::new();
        for (k, v) in d.iter() {
            map.insert(k.extract::<String>()?, py_to_value(&v)?);
        }
        return Ok(Value::Object(map));
    }
    if let Ok(items) = obj.try_iter() {
        return items.map(|i| py_to_value(&i?)).collect::<PyResult<Vec<_>>>().map(Value::Array);
    }
    Err(PyValueError::new_err(format!("cannot convert {} to a config value", obj.get_type().name()?)))
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    value_to_py(py, &serde_json::to_value(v).map_err(json_err)?)
}

fn from_dict<T: serde::de::DeserializeOwned>(d: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let v = match d {
        Some(d) => py_to_value(d.as_any())?,
        None => Value::Object(Default::default()),
    };
    serde_json::from_value(v).map_err(json_err)
}

#[pyclass(name = "MotorParams", module = "pmsm_adp_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMotorParams {
    inner: MotorParams,
}

#[pymethods]
impl PyMotorParams {
    /// `"nominal"`, `"perturbed_sim"` or `"perturbed_exp"`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        MotorParams::preset(name).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn nominal() -> Self {
        Self { inner: MotorParams::nominal() }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = MotorParams::from_toml_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        MotorParams::load(path).map(|inner| Self { inner }).map_err(to_py_err)
    }

    fn to_toml(&self) -> PyResult<String> {
        toml::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    /// Copy with the given fields overridden, e.g. `p.replace(stator_resistance_ohm=2.0)`.
    #[pyo3(signature = (**changes))]
    fn replace(&self, changes: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut v = serde_json::to_value(self.inner).map_err(json_err)?;
        if let (Some(changes), Value::Object(map)) = (changes, &mut v) {
            for (k, item) in changes.iter() {
                let key: String = k.extract()?;
                if !map.contains_key(&key) {
                    return Err(PyValueError::new_err(format!("unknown motor parameter `{key}`")));
                }
                map.insert(key, py_to_value(&item)?);
            }
        }
        let inner: MotorParams = serde_json::from_value(v).map_err(json_err)?;
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn torque_constant(&self) -> f64 {
        self.inner.torque_constant()
    }

    fn max_phase_voltage(&self) -> f64 {
        self.inner.max_phase_voltage()
    }

    #[getter]
    fn pole_pairs(&self) -> u32 {
        self.inner.pole_pairs
    }
    #[getter]
    fn magnet_flux_wb(&self) -> f64 {
        self.inner.magnet_flux_wb
    }
    #[getter]
    fn stator_resistance_ohm(&self) -> f64 {
        self.inner.stator_resistance_ohm
    }
    #[getter]
    fn inductance_d_h(&self) -> f64 {
        self.inner.inductance_d_h
    }
    #[getter]
    fn inductance_q_h(&self) -> f64 {
        self.inner.inductance_q_h
    }
    #[getter]
    fn inertia_kgm2(&self) -> f64 {
        self.inner.inertia_kgm2
    }
    #[getter]
    fn dc_bus_v(&self) -> f64 {
        self.inner.dc_bus_v
    }
    #[getter]
    fn sampling_time_s(&self) -> f64 {
        self.inner.sampling_time_s
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "MotorParams(P={}, λm={}, Rs={}, Ld={}, Lq={}, J={})",
            p.pole_pairs, p.magnet_flux_wb, p.stator_resistance_ohm, p.inductance_d_h, p.inductance_q_h, p.inertia_kgm2
        )
    }
}

#[pyclass(name = "CostSpec", module = "pmsm_adp_py", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyCostSpec {
    inner: CostSpec,
}

#[pymethods]
impl PyCostSpec {
    #[new]
    #[pyo3(signature = (k1 = 30.0, k2 = 0.5, k3 = 100.0, gamma = 0.5))]
    fn new(k1: f64, k2: f64, k3: f64, gamma: f64) -> PyResult<Self> {
        let inner = CostSpec { k1, k2, k3, gamma };
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn published() -> Self {
        Self { inner: CostSpec::published() }
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.inner.k1
    }
    #[getter]
    fn k2(&self) -> f64 {
        self.inner.k2
    }
    #[getter]
    fn k3(&self) -> f64 {
        self.inner.k3
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!("CostSpec(k1={}, k2={}, k3={}, gamma={})", c.k1, c.k2, c.k3, c.gamma)
    }
}

#[pyclass(name = "WeightSet", module = "pmsm_adp_py", frozen, skip_from_py_object)]
struct PyWeightSet {
    inner: WeightSet,
}

#[pymethods]
impl PyWeightSet {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        WeightSet::load(path).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        WeightSet::from_json(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py_err)
    }

    /// SHA-256 of the JSON encoding.
    fn digest(&self) -> PyResult<String> {
        self.inner.digest().map_err(to_py_err)
    }

    /// Critic value at a normalized input vector.
    fn value(&self, eta: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&eta).map_err(to_py_err)
    }

    /// Actor voltages `(v_d, v_q)` at a normalized input vector.
    fn action(&self, eta: Vec<f64>) -> PyResult<(f64, f64)> {
        self.inner.action(&eta).map_err(to_py_err)
    }

    /// Normalized input vector for physical `(i_d, i_q, τ*, ω_m)`.
    fn normalize(&self, i_d: f64, i_q: f64, tau_ref: f64, omega_m: f64) -> Vec<f64> {
        let n = self.inner.normalizer.normalize(i_d, i_q, tau_ref, omega_m);
        n[..self.inner.mode.input_dim()].to_vec()
    }

    #[getter]
    fn critic(&self) -> Vec<f64> {
        self.inner.critic.clone()
    }

    #[getter]
    fn actor(&self) -> Vec<[f64; 2]> {
        self.inner.actor.clone()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.mode.input_dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "WeightSet(inputs={}, critic_terms={}, actor_terms={})",
            self.inner.mode.input_dim(),
            self.inner.critic.len(),
            self.inner.actor.len()
        )
    }
}

/// Runs value iteration. `config` takes the training-config fields
/// (`sample_count`, `seed`, `mode`, `beta_v`, ...); missing ones use defaults.
/// Returns `(weights, report)`.
#[pyfunction]
#[pyo3(signature = (params, cost, config = None))]
fn train<'py>(
    py: Python<'py>,
    params: &PyMotorParams,
    cost: &PyCostSpec,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<(PyWeightSet, Bound<'py, PyAny>)> {
    let cfg: TrainingConfig = from_dict(config)?;
    let (p, c) = (params.inner, cost.inner);
    let out = py.detach(|| value_iteration(&cfg, &c, &p)).map_err(to_py_err)?;
    let report = to_py(py, &out.report)?;
    Ok((PyWeightSet { inner: out.weights }, report))
}

/// `count` uniform points in `[-half_width, half_width]^dim`.
#[pyfunction]
fn sample_box(count: usize, dim: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    core_sample_box(count, dim, half_width, seed)
}

/// Bellman residual statistics of `weights` on normalized `samples`.
#[pyfunction]
fn residual<'py>(
    py: Python<'py>,
    weights: &PyWeightSet,
    samples: Vec<Vec<f64>>,
    cost: &PyCostSpec,
    params: &PyMotorParams,
) -> PyResult<Bound<'py, PyAny>> {
    let stats = py
        .detach(|| bellman_residual(&weights.inner, &samples, &cost.inner, &params.inner))
        .map_err(to_py_err)?;
    to_py(py, &stats)
}

#[pyclass(name = "Scenario", module = "pmsm_adp_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Scenario::from_toml_str(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    /// Loads a scenario file; relative weight paths resolve against it.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Scenario::load(path).map(|inner| Self { inner }).map_err(to_py_err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(to_py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn controller(&self) -> &'static str {
        self.inner.controller.name()
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.inner.duration_s
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, controller={})", self.inner.name, self.inner.controller.name())
    }
}

#[pyclass(name = "Trace", module = "pmsm_adp_py", frozen, skip_from_py_object)]
struct PyTrace {
    inner: SimTrace,
    #[pyo3(get)]
    aborted: Option<String>,
}

fn parse_signal(name: &str) -> PyResult<Signal> {
    match name {
        "speed" => Ok(Signal::Speed),
        "torque" => Ok(Signal::Torque),
        "torque_tracking" => Ok(Signal::TorqueTracking),
        other => Err(PyValueError::new_err(format!(
            "unknown signal `{other}` (expected speed, torque or torque_tracking)"
        ))),
    }
}

#[pymethods]
impl PyTrace {
    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<Self> {
        SimTrace::load_csv(path).map(|inner| Self { inner, aborted: None }).map_err(to_py_err)
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_csv(path).map_err(to_py_err)
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string().map_err(to_py_err)
    }

    #[getter]
    fn ts(&self) -> f64 {
        self.inner.ts
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Column name → list of values, in CSV column order.
    fn columns<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rs = &self.inner.records;
        let d = PyDict::new(py);
        let col = |f: fn(&pmsm_adp::sim::TraceRecord) -> f64| rs.iter().map(f).collect::<Vec<f64>>();
        let cols: [Vec<f64>; 10] = [
            col(|r| r.t),
            col(|r| r.i_d),
            col(|r| r.i_q),
            col(|r| r.omega_m),
            col(|r| r.tau_em),
            col(|r| r.tau_ref),
            col(|r| r.v_d),
            col(|r| r.v_q),
            col(|r| f64::from(u8::from(r.saturated))),
            col(|r| f64::from(u8::from(r.out_of_omega))),
        ];
        for (name, values) in CSV_COLUMNS.iter().zip(cols) {
            d.set_item(*name, values)?;
        }
        Ok(d)
    }

    /// ITAE against a piecewise-constant reference given as `[(t, value), ...]`.
    #[pyo3(signature = (signal, reference = None))]
    fn itae(&self, signal: &str, reference: Option<Vec<(f64, f64)>>) -> PyResult<f64> {
        let profile = match reference {
            Some(points) => Profile::new(points).map_err(to_py_err)?,
            None => Profile::constant(0.0),
        };
        Ok(itae(&self.inner, &profile, parse_signal(signal)?))
    }

    fn realized_cost(&self, cost: &PyCostSpec, params: &PyMotorParams) -> f64 {
        realized_cost(&self.inner, &cost.inner, &params.inner)
    }

    fn __repr__(&self) -> String {
        format!("Trace(samples={}, ts={})", self.inner.len(), self.inner.ts)
    }
}

/// Runs one scenario. A run that diverges returns its partial trace with
/// `aborted` set to the reason.
#[pyfunction]
#[pyo3(signature = (scenario, weights = None, seed = 0))]
fn simulate(py: Python<'_>, scenario: &PyScenario, weights: Option<&PyWeightSet>, seed: u64) -> PyResult<PyTrace> {
    let w = weights.map(|w| &w.inner);
    let sc = &scenario.inner;
    match py.detach(|| run_scenario_with(sc, w, seed)) {
        Ok(inner) => Ok(PyTrace { inner, aborted: None }),
        Err(a) if a.partial.is_empty() => Err(to_py_err(a.error)),
        Err(a) => Ok(PyTrace { inner: a.partial, aborted: Some(a.error.to_string()) }),
    }
}

/// Summary metrics of a trace produced by `scenario`.
#[pyfunction]
#[pyo3(signature = (scenario, trace, cost = None, load_step_s = None))]
fn metrics<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    trace: &PyTrace,
    cost: Option<&PyCostSpec>,
    load_step_s: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cost = cost.map_or(SuiteConfig::default().nominal_cost, |c| c.inner);
    let sc = &scenario.inner;
    let mut m = trace_metrics(sc, sc.controller.name(), &trace.inner, &cost, load_step_s).map_err(to_py_err)?;
    m.aborted.clone_from(&trace.aborted);
    to_py(py, &m)
}

/// Runs the benchmark suite, optionally writing its artifacts to `out_dir`.
/// `config` overrides suite settings. Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (out_dir = None, config = None))]
fn run_suite<'py>(
    py: Python<'py>,
    out_dir: Option<PathBuf>,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SuiteConfig = from_dict(config)?;
    let report = py
        .detach(|| reproduce_paper_suite(out_dir.as_deref(), &cfg))
        .map_err(to_py_err)?;
    to_py(py, &report)
}

#[pymodule]
fn pmsm_adp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMotorParams>()?;
    m.add_class::<PyCostSpec>()?;
    m.add_class::<PyWeightSet>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(sample_box, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
