use std::collections::BTreeMap;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use debtdyn::io::ScenarioFileError;
use debtdyn::{LevelState, MultiplierSpec, PerturbationSet, PropagationConvention, RatePair};

fn to_py_err(err: debtdyn::Error) -> PyErr {
    if err.is_arithmetic() {
        PyArithmeticError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn perturbations(p: Option<BTreeMap<usize, f64>>) -> PyResult<PerturbationSet> {
    PerturbationSet::from_entries(p.unwrap_or_default()).map_err(to_py_err)
}

fn multiplier(eta: f64) -> PyResult<MultiplierSpec> {
    MultiplierSpec::new(eta).map_err(to_py_err)
}

fn convention(name: &str) -> PyResult<PropagationConvention> {
    name.parse().map_err(PyValueError::new_err)
}

/// Initial debt ratio, per-period `(r, g_nom)` pairs and nominal surpluses,
/// all as fractions.
#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: debtdyn::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    fn new(d0: f64, rates: Vec<(f64, f64)>, x_nom: Vec<f64>) -> PyResult<Self> {
        let horizon = rates.len();
        let rates = rates.into_iter().map(|(r, g)| RatePair::new(r, g)).collect();
        let inner = debtdyn::Scenario::new(d0, horizon, rates, x_nom).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn constant(d0: f64, horizon: usize, r: f64, g_nom: f64, x_nom: f64) -> PyResult<Self> {
        let inner = debtdyn::Scenario::constant(d0, horizon, r, g_nom, x_nom).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d0(&self) -> f64 {
        self.inner.d0
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }

    #[getter]
    fn rates(&self) -> Vec<(f64, f64)> {
        self.inner.rates.iter().map(|r| (r.r, r.g_nom)).collect()
    }

    #[getter]
    fn x_nom(&self) -> Vec<f64> {
        self.inner.x_nom.clone()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(d0={}, horizon={})", self.inner.d0, self.inner.horizon)
    }
}

/// Exact debt-ratio trajectory `d[0..=horizon]`.
#[pyfunction]
#[pyo3(signature = (scenario, perturbations=None, eta=0.0))]
fn simulate_exact(scenario: &PyScenario, perturbations: Option<BTreeMap<usize, f64>>, eta: f64) -> PyResult<Vec<f64>> {
    let p = self::perturbations(perturbations)?;
    let d = debtdyn::simulate_exact(&scenario.inner, &p, multiplier(eta)?).map_err(to_py_err)?;
    Ok(d.d)
}

/// Debt and GDP levels from initial levels `debt0`, `gdp0`.
#[pyfunction]
#[pyo3(signature = (scenario, debt0, gdp0, perturbations=None, eta=0.0))]
fn simulate_levels(
    scenario: &PyScenario,
    debt0: f64,
    gdp0: f64,
    perturbations: Option<BTreeMap<usize, f64>>,
    eta: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = self::perturbations(perturbations)?;
    let path = debtdyn::simulate_levels(&LevelState::new(debt0, gdp0), &scenario.inner, &p, multiplier(eta)?)
        .map_err(to_py_err)?;
    Ok((path.debt, path.gdp))
}

#[pyfunction]
fn simulate_linear_nominal(scenario: &PyScenario) -> PyResult<Vec<f64>> {
    Ok(debtdyn::simulate_linear_nominal(&scenario.inner).map_err(to_py_err)?.d)
}

#[pyfunction]
#[pyo3(signature = (scenario, perturbations=None, eta=0.0))]
fn simulate_linear_perturbed(
    scenario: &PyScenario,
    perturbations: Option<BTreeMap<usize, f64>>,
    eta: f64,
) -> PyResult<Vec<f64>> {
    let p = self::perturbations(perturbations)?;
    let d = debtdyn::simulate_linear_perturbed(&scenario.inner, &p, multiplier(eta)?).map_err(to_py_err)?;
    Ok(d.d)
}

/// First-order deviations `Δd[0..=horizon]`.
#[pyfunction]
#[pyo3(signature = (scenario, perturbations=None, eta=0.0, convention="additive"))]
fn delta_dynamics(
    scenario: &PyScenario,
    perturbations: Option<BTreeMap<usize, f64>>,
    eta: f64,
    convention: &str,
) -> PyResult<Vec<f64>> {
    let p = self::perturbations(perturbations)?;
    let d = debtdyn::delta_dynamics(&scenario.inner, &p, multiplier(eta)?, self::convention(convention)?)
        .map_err(to_py_err)?;
    Ok(d.delta_d)
}

#[pyfunction]
#[pyo3(signature = (scenario, perturbations, eta, t_obs, convention="additive"))]
fn superpose_delta(
    scenario: &PyScenario,
    perturbations: BTreeMap<usize, f64>,
    eta: f64,
    t_obs: usize,
    convention: &str,
) -> PyResult<f64> {
    let p = self::perturbations(Some(perturbations))?;
    debtdyn::superpose_delta(
        &scenario.inner,
        &p,
        multiplier(eta)?,
        self::convention(convention)?,
        t_obs,
    )
    .map_err(to_py_err)
}

/// Square `horizon x horizon` list; entry `[m-1][t-1]` is the coefficient for
/// a shock at `m` observed at `t` (zero above the diagonal).
#[pyfunction]
#[pyo3(signature = (scenario, eta, convention="additive"))]
fn sensitivity_matrix(scenario: &PyScenario, eta: f64, convention: &str) -> PyResult<Vec<Vec<f64>>> {
    let matrix = debtdyn::sensitivity_matrix(&scenario.inner, multiplier(eta)?, self::convention(convention)?)
        .map_err(to_py_err)?;
    let n = matrix.horizon;
    Ok((1..=n).map(|m| (1..=n).map(|t| matrix.get(m, t)).collect()).collect())
}

#[pyfunction]
fn threshold_report<'py>(py: Python<'py>, scenario: &PyScenario, eta: f64) -> PyResult<Bound<'py, PyDict>> {
    let report = debtdyn::threshold_report(&scenario.inner, multiplier(eta)?).map_err(to_py_err)?;
    let records: Vec<(usize, f64, f64, &'static str)> = report
        .records
        .iter()
        .map(|r| (r.t, r.d_nom_prev, r.eta_d, r.classification.as_str()))
        .collect();
    let out = PyDict::new(py);
    out.set_item("records", records)?;
    out.set_item("break_even", report.break_even)?;
    Ok(out)
}

/// `(eta, delta_linear, delta_exact)` per multiplier, in input order.
#[pyfunction]
#[pyo3(signature = (scenario, perturbations, etas, t_obs, convention="additive"))]
fn eta_sweep(
    scenario: &PyScenario,
    perturbations: BTreeMap<usize, f64>,
    etas: Vec<f64>,
    t_obs: usize,
    convention: &str,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let p = self::perturbations(Some(perturbations))?;
    let records =
        debtdyn::eta_sweep(&scenario.inner, &p, &etas, self::convention(convention)?, t_obs).map_err(to_py_err)?;
    Ok(records.iter().map(|r| (r.eta, r.delta_linear, r.delta_exact)).collect())
}

/// Parses a scenario document into `(scenario, perturbations, eta, convention)`.
#[pyfunction]
fn parse_scenario_file(text: &str) -> PyResult<(PyScenario, BTreeMap<usize, f64>, f64, String)> {
    let parsed = debtdyn::io::parse_scenario_file(text).map_err(|err| match err {
        ScenarioFileError::Invalid(e) => to_py_err(e),
        other => PyValueError::new_err(other.to_string()),
    })?;
    Ok((
        PyScenario { inner: parsed.scenario },
        parsed.perturbations.iter().collect(),
        parsed.multiplier.eta(),
        parsed.convention.to_string(),
    ))
}

#[pyfunction]
fn compose_nominal_growth(g_real: f64, deflator: f64) -> PyResult<f64> {
    debtdyn::compose_nominal_growth(g_real, deflator).map_err(to_py_err)
}

#[pyfunction]
fn percent_to_ratio(v: f64) -> f64 {
    debtdyn::percent_to_ratio(v)
}

#[pyfunction]
fn ratio_to_percent(v: f64) -> f64 {
    debtdyn::ratio_to_percent(v)
}

/// Debt-to-GDP dynamics under fiscal-multiplier feedback.
#[pymodule]
fn debtdyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(simulate_exact, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_levels, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_linear_nominal, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_linear_perturbed, m)?)?;
    m.add_function(wrap_pyfunction!(delta_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(superpose_delta, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_report, m)?)?;
    m.add_function(wrap_pyfunction!(eta_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(parse_scenario_file, m)?)?;
    m.add_function(wrap_pyfunction!(compose_nominal_growth, m)?)?;
    m.add_function(wrap_pyfunction!(percent_to_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_to_percent, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
