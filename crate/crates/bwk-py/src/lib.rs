//! Python bindings for the bandit-with-knapsacks crate.
//!
//! The module mirrors the Rust surface thinly: environments are opaque
//! handles with methods for the LP benchmark and single episodes, and the
//! batch runner exchanges the same JSON config and CSV formats as the CLI,
//! so results match the command-line tool byte for byte.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bwk::confidence::RadiusParams;
use bwk::discretization::Mesh;
use bwk::harness::{build_policy, run_experiment, EnvSpec, ExperimentConfig};
use bwk::lp::{lp_perfect, solve_instance};
use bwk::model::{run_episode_light, Environment};
use bwk::rng::RngState;

fn py_err(err: bwk::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn json_err(err: serde_json::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A fully specified environment: per-arm outcome distributions plus
/// budgets, horizon, and the declared time and null structure.
#[pyclass(frozen)]
struct Env {
    inner: Environment,
}

#[pymethods]
impl Env {
    /// Build from the tagged JSON a config file's `env` field uses, e.g.
    /// `{"env": "pricing", "demand": [...], "prices": [...], "B": 5, "T": 100}`.
    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Self> {
        let spec: EnvSpec = serde_json::from_str(text).map_err(json_err)?;
        Ok(Env { inner: spec.build().map_err(py_err)? })
    }

    /// Build from the full serialized form produced by `to_json`, outcome
    /// support included.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        Ok(Env { inner: Environment::from_json(&value).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn arms(&self) -> usize {
        self.inner.arms()
    }

    #[getter]
    fn resources(&self) -> usize {
        self.inner.resources()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.instance().horizon
    }

    #[getter]
    fn budgets(&self) -> Vec<f64> {
        self.inner.instance().budgets.clone()
    }

    /// The same instance with budgets and horizon multiplied by `alpha`.
    fn scale(&self, alpha: u32) -> PyResult<Self> {
        Ok(Env { inner: self.inner.scale(alpha).map_err(py_err)? })
    }

    /// Value of the expected-pulls relaxation, the regret benchmark.
    fn lpopt(&self) -> PyResult<f64> {
        Ok(solve_instance(self.inner.instance()).map_err(py_err)?.value)
    }

    /// Full LP solution as a JSON string: value, expected pulls per arm,
    /// dual prices per resource, and which budgets bind.
    fn lp_solution(&self) -> PyResult<String> {
        let sol = solve_instance(self.inner.instance()).map_err(py_err)?;
        Ok(serde_json::json!({
            "value": sol.value,
            "expected_pulls": sol.xi,
            "dual_prices": sol.eta,
            "tight_budgets": sol.tight,
        })
        .to_string())
    }

    /// Per-round optimal mixture over arms, computed on the
    /// uniform-budget rescaling of the instance. Needs declared time and
    /// null structure.
    fn optimal_mixture(&self) -> PyResult<Vec<f64>> {
        let normalized = self.inner.instance().normalize_budgets();
        let dist = lp_perfect(&normalized).map_err(py_err)?;
        Ok(dist.weights().to_vec())
    }

    /// Play one episode and return `(total_reward, stop_time)`. Policies
    /// are named as in config files: `pdbwk`, `balance`, `ucb_fixed_arm`,
    /// `uniform_random`, or `fixed:[w0, w1, ...]`.
    #[pyo3(signature = (policy, seed, c_rad=None, balance_k=None))]
    fn run_episode(
        &self,
        policy: &str,
        seed: u64,
        c_rad: Option<f64>,
        balance_k: Option<usize>,
    ) -> PyResult<(f64, usize)> {
        let shape = self.inner.instance().shape();
        let mut policy = build_policy(policy, &shape, c_rad, balance_k).map_err(py_err)?;
        let mut rng = RngState::new(seed);
        let trace = run_episode_light(&self.inner, policy.as_mut(), &mut rng).map_err(py_err)?;
        Ok((trace.total_reward, trace.stop_time))
    }
}

/// Run the experiment described by a JSON config (same schema as the CLI's
/// `run` subcommand) and return `(summary_json, csv)` strings.
#[pyfunction]
fn run_experiment_json(config: &str) -> PyResult<(String, String)> {
    let config = ExperimentConfig::from_json_str(config).map_err(py_err)?;
    let report = run_experiment(&config).map_err(py_err)?;
    let summary = serde_json::to_string_pretty(&report.summary_json()).map_err(json_err)?;
    Ok((summary, report.to_csv()))
}

/// Price grid of the requested mesh: `kind` is `additive` or `hyperbolic`,
/// and the hyperbolic mesh needs a positive `floor`.
#[pyfunction]
#[pyo3(signature = (kind, eps, floor=None))]
fn mesh_points(kind: &str, eps: f64, floor: Option<f64>) -> PyResult<Vec<f64>> {
    let mesh = match kind {
        "additive" => Mesh::additive(eps).map_err(py_err)?,
        "hyperbolic" => {
            let floor = floor.ok_or_else(|| {
                PyValueError::new_err("hyperbolic mesh needs a floor")
            })?;
            Mesh::hyperbolic(eps, floor).map_err(py_err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown mesh kind {other:?} (expected additive or hyperbolic)"
            )))
        }
    };
    Ok(mesh.points().to_vec())
}

/// Width of the confidence interval around an empirical mean `nu` after
/// `n` observations, `sqrt(c_rad * nu / n) + c_rad / n`.
#[pyfunction]
fn confidence_radius(nu: f64, n: f64, c_rad: f64) -> PyResult<f64> {
    if !(nu >= 0.0 && n > 0.0) {
        return Err(PyValueError::new_err("need nu >= 0 and n > 0"));
    }
    Ok(RadiusParams::new(c_rad).map_err(py_err)?.rad(nu, n))
}

/// Default radius scale for a problem shape, the one policies use when no
/// override is given.
#[pyfunction]
fn default_c_rad(resources: usize, horizon: usize, arms: usize) -> f64 {
    RadiusParams::default_for(resources, horizon, arms).c_rad()
}

#[pymodule]
fn bwk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Env>()?;
    m.add_function(wrap_pyfunction!(run_experiment_json, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_points, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_radius, m)?)?;
    m.add_function(wrap_pyfunction!(default_c_rad, m)?)?;
    Ok(())
}
