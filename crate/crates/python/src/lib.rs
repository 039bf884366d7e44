//! Python bindings for the `meddit` crate.

use std::str::FromStr;

use ::meddit::bandit::{self, BanditConfig, Estimator, Sigma, StopReason};
use ::meddit::bench::{Algorithm, Harness};
use ::meddit::dataset;
use ::meddit::metrics::Metric;
use ::meddit::oracle::DistanceOracle;
use ::meddit::{baselines, rng, Error};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_metric(name: &str) -> PyResult<Metric> {
    Metric::from_str(name).map_err(py_err)
}

/// Points (dense or sparse vectors) or a precomputed distance matrix.
#[pyclass(frozen, skip_from_py_object, module = "meddit_py")]
#[derive(Clone)]
struct PointSet {
    inner: dataset::PointSet,
}

#[pymethods]
impl PointSet {
    #[staticmethod]
    fn dense(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(dataset::PointSet::dense(rows).map_err(py_err)?.into())
    }

    /// Sparse rows as `(index, value)` pairs over dimension `d`.
    #[staticmethod]
    fn sparse(d: usize, rows: Vec<Vec<(usize, f64)>>) -> PyResult<Self> {
        Ok(dataset::PointSet::sparse(d, rows).map_err(py_err)?.into())
    }

    #[staticmethod]
    fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(dataset::PointSet::matrix(rows).map_err(py_err)?.into())
    }

    /// `format` is one of `dense`, `sparse`, `matrix`.
    #[staticmethod]
    #[pyo3(signature = (path, format = "dense"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let points = match format {
            "dense" => dataset::load_dense_csv(path),
            "sparse" => dataset::load_sparse(path),
            "matrix" => dataset::load_matrix_csv(path),
            other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        };
        Ok(points.map_err(py_err)?.into())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        dataset::write_points(&self.inner, path).map_err(py_err)
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(dataset::normalize_rows(&self.inner).map_err(py_err)?.into())
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner {
            dataset::PointSet::Dense(_) => "dense",
            dataset::PointSet::Sparse(_) => "sparse",
            dataset::PointSet::Matrix(_) => "matrix",
        }
    }

    #[getter]
    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PointSet(kind={}, n={})", self.kind(), self.inner.len())
    }
}

impl From<dataset::PointSet> for PointSet {
    fn from(inner: dataset::PointSet) -> Self {
        PointSet { inner }
    }
}

#[pyclass(frozen, get_all, module = "meddit_py")]
struct MedoidResult {
    medoid_index: usize,
    mu_estimate: f64,
    total_evaluations: u64,
    search_evaluations: u64,
    per_arm_pulls: Vec<u64>,
    stopped_by: &'static str,
    iterations: u64,
    sigma: Option<f64>,
}

#[pymethods]
impl MedoidResult {
    fn __repr__(&self) -> String {
        format!(
            "MedoidResult(medoid_index={}, mu_estimate={}, total_evaluations={}, stopped_by={:?})",
            self.medoid_index, self.mu_estimate, self.total_evaluations, self.stopped_by
        )
    }
}

impl From<bandit::MedoidResult> for MedoidResult {
    fn from(r: bandit::MedoidResult) -> Self {
        MedoidResult {
            medoid_index: r.medoid_index,
            mu_estimate: r.mu_estimate,
            total_evaluations: r.total_evaluations,
            search_evaluations: r.search_evaluations(),
            stopped_by: match r.stopped_by {
                StopReason::Stopping => "stopping",
                StopReason::IterationCap => "iteration-cap",
                StopReason::Budget => "budget",
                StopReason::Exhaustive => "exhaustive",
            },
            per_arm_pulls: r.per_arm_pulls,
            iterations: r.iterations,
            sigma: r.sigma,
        }
    }
}

fn bandit_config(n: usize, delta: Option<f64>, sigma: Option<f64>, batch: usize, catoni: bool) -> BanditConfig {
    let mut config = BanditConfig::default().with_delta(delta.unwrap_or_else(|| BanditConfig::theorem_delta(n)));
    if let Some(s) = sigma {
        config = config.with_sigma(Sigma::Fixed(s));
    }
    if catoni {
        config = config.with_estimator(Estimator::Catoni);
    }
    config.batch = batch;
    config
}

#[pyfunction]
#[pyo3(signature = (points, i, j, metric = "l1"))]
fn distance(points: &PointSet, i: usize, j: usize, metric: &str) -> PyResult<f64> {
    DistanceOracle::new(&points.inner, parse_metric(metric)?).distance(i, j).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (points, metric = "l1", workers = 1))]
fn brute_force_medoid(py: Python<'_>, points: &PointSet, metric: &str, workers: usize) -> PyResult<MedoidResult> {
    let metric = parse_metric(metric)?;
    let r = py.detach(|| baselines::brute_force_medoid(&DistanceOracle::new(&points.inner, metric).with_workers(workers)));
    Ok(r.map_err(py_err)?.into())
}

/// Med-dit. `delta=None` uses `2/n^3`; `sigma=None` estimates it from data.
#[pyfunction]
#[pyo3(name = "meddit", signature = (points, metric = "l1", delta = 1e-3, sigma = None, batch = 1, seed = 0, workers = 1, catoni = false))]
#[allow(clippy::too_many_arguments)]
fn run_meddit(
    py: Python<'_>,
    points: &PointSet,
    metric: &str,
    delta: Option<f64>,
    sigma: Option<f64>,
    batch: usize,
    seed: u64,
    workers: usize,
    catoni: bool,
) -> PyResult<MedoidResult> {
    let metric = parse_metric(metric)?;
    let config = bandit_config(points.inner.len(), delta, sigma, batch, catoni);
    let r = py.detach(|| {
        let oracle = DistanceOracle::new(&points.inner, metric).with_workers(workers);
        bandit::meddit(&oracle, &config, &mut rng::stream(seed, rng::STREAM_ALGORITHM))
    });
    Ok(r.map_err(py_err)?.into())
}

#[pyfunction]
#[pyo3(signature = (points, budget_per_point, metric = "l1", seed = 0))]
fn rand_medoid(py: Python<'_>, points: &PointSet, budget_per_point: usize, metric: &str, seed: u64) -> PyResult<MedoidResult> {
    let metric = parse_metric(metric)?;
    let r = py.detach(|| {
        let oracle = DistanceOracle::new(&points.inner, metric);
        baselines::rand_medoid(&oracle, budget_per_point, &mut rng::stream(seed, rng::STREAM_ALGORITHM))
    });
    Ok(r.map_err(py_err)?.into())
}

/// Error rate per budget over `trials` seeded runs; `(budgets, error_rates)`.
#[pyfunction]
#[pyo3(signature = (points, algorithm, budgets, trials, metric = "l1", seed = 0, workers = 1))]
#[allow(clippy::too_many_arguments)]
fn error_curve(
    py: Python<'_>,
    points: &PointSet,
    algorithm: &str,
    budgets: Vec<u64>,
    trials: u64,
    metric: &str,
    seed: u64,
    workers: usize,
) -> PyResult<(Vec<u64>, Vec<f64>)> {
    let metric = parse_metric(metric)?;
    let algorithm = Algorithm::from_str(algorithm).map_err(py_err)?;
    let curve = py.detach(|| {
        let harness = Harness::new(&points.inner, metric, "python").with_seed(seed).with_workers(workers);
        let truth = harness.truth()?;
        harness.error_curve(algorithm, &budgets, trials, truth)
    });
    let curve = curve.map_err(py_err)?;
    Ok((curve.budgets, curve.error_rates))
}

/// `(avg_pulls_per_point, max_pulls_per_point, failures)` over `trials` runs.
#[pyfunction]
#[pyo3(signature = (points, trials, metric = "l1", delta = 1e-3, seed = 0, workers = 1, catoni = false))]
#[allow(clippy::too_many_arguments)]
fn stopping_stats(
    py: Python<'_>,
    points: &PointSet,
    trials: u64,
    metric: &str,
    delta: Option<f64>,
    seed: u64,
    workers: usize,
    catoni: bool,
) -> PyResult<(f64, u64, u64)> {
    let metric = parse_metric(metric)?;
    let config = bandit_config(points.inner.len(), delta, None, 1, catoni);
    let algorithm = if catoni { Algorithm::MedditCatoni } else { Algorithm::Meddit };
    let stats = py.detach(|| {
        let harness = Harness::new(&points.inner, metric, "python")
            .with_config(config)
            .with_seed(seed)
            .with_workers(workers);
        let truth = harness.truth()?;
        harness.stopping_stats(algorithm, trials, truth)
    });
    let s = stats.map_err(py_err)?;
    Ok((s.avg_pulls_per_point, s.max_pulls_per_point, s.failures))
}

/// Returns `(points, planted_index)`.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn gen_adversarial(n: usize, seed: u64) -> PyResult<(PointSet, usize)> {
    let inst = dataset::gen_adversarial(n, seed).map_err(py_err)?;
    Ok((inst.points.into(), inst.planted))
}

/// Returns `(points, theta)`.
#[pyfunction]
#[pyo3(signature = (n, gamma, noise_sd = 1.0, seed = 0))]
fn gen_gaussian_prior(n: usize, gamma: f64, noise_sd: f64, seed: u64) -> PyResult<(PointSet, Vec<f64>)> {
    let inst = dataset::gen_gaussian_prior(n, gamma, noise_sd, seed).map_err(py_err)?;
    Ok((inst.points.into(), inst.theta))
}

#[pyfunction]
#[pyo3(signature = (n, d, seed = 0))]
fn gen_gaussian_points(n: usize, d: usize, seed: u64) -> PyResult<PointSet> {
    Ok(dataset::gen_gaussian_points(n, d, seed).map_err(py_err)?.into())
}

#[pyfunction]
fn confidence_radius(sigma: f64, delta: f64, pulls: u64) -> PyResult<f64> {
    bandit::confidence_radius(sigma, delta, pulls).map_err(py_err)
}

#[pyfunction]
fn catoni_estimate(samples: Vec<f64>, sigma: f64, delta: f64) -> PyResult<f64> {
    bandit::catoni_estimate(&samples, sigma, delta).map_err(py_err)
}

#[pymodule]
fn meddit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PointSet>()?;
    m.add_class::<MedoidResult>()?;
    m.add("METRICS", Metric::ALL.iter().map(|x| x.name()).collect::<Vec<_>>())?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_medoid, m)?)?;
    m.add_function(wrap_pyfunction!(run_meddit, m)?)?;
    m.add_function(wrap_pyfunction!(rand_medoid, m)?)?;
    m.add_function(wrap_pyfunction!(error_curve, m)?)?;
    m.add_function(wrap_pyfunction!(stopping_stats, m)?)?;
    m.add_function(wrap_pyfunction!(gen_adversarial, m)?)?;
    m.add_function(wrap_pyfunction!(gen_gaussian_prior, m)?)?;
    m.add_function(wrap_pyfunction!(gen_gaussian_points, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_radius, m)?)?;
    m.add_function(wrap_pyfunction!(catoni_estimate, m)?)?;
    Ok(())
}
