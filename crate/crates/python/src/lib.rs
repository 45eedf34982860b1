//! Python bindings for the `mdcp` prediction-interval library.

use mdcp::bandwidth::BandwidthMode;
use mdcp::cli::parse_bandwidth;
use mdcp::dgp_eval::{rolling_eval as rolling_eval_rs, DEFAULT_WARMUP};
use mdcp::error::ErrorClass;
use mdcp::{
    embed, last_predictor, Alpha, Bandwidths, DgpModel, DgpSpec, Error, Innovation, Method,
    PredictorConfig, TimeSeries,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    let msg = format!("{}: {}", e.code(), e);
    match e.class() {
        ErrorClass::Usage | ErrorClass::Data => PyValueError::new_err(msg),
        ErrorClass::Numerical | ErrorClass::Internal => PyRuntimeError::new_err(msg),
    }
}

fn series(values: Vec<f64>) -> PyResult<TimeSeries> {
    TimeSeries::new(values).map_err(to_py)
}

fn bandwidth_mode(mode: &str) -> PyResult<BandwidthMode> {
    parse_bandwidth(mode).map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn predictor(
    method: &str,
    alpha: f64,
    p: usize,
    bandwidth: &str,
    grid_size: usize,
    replicates: usize,
    warmup: usize,
) -> PyResult<PredictorConfig> {
    Ok(PredictorConfig {
        method: method.parse::<Method>().map_err(to_py)?,
        order: p,
        alpha: Alpha::new(alpha).map_err(to_py)?,
        bandwidth: bandwidth_mode(bandwidth)?,
        grid_size,
        replicates,
        warmup,
    })
}

/// One-step-ahead prediction interval.
#[pyclass(frozen, get_all, module = "pymdcp")]
pub struct Interval {
    lower: f64,
    upper: f64,
    alpha: f64,
    method: String,
    /// Predictor bandwidth used for the fit.
    h: f64,
    /// Response bandwidth used for the fit.
    h0: f64,
}

#[pymethods]
impl Interval {
    fn length(&self) -> f64 {
        self.upper - self.lower
    }

    fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    fn __repr__(&self) -> String {
        format!(
            "Interval(method={}, alpha={}, lower={}, upper={})",
            self.method, self.alpha, self.lower, self.upper
        )
    }
}

/// Simulates `n` values of `Y_{t+1} = g(Y_t) + e_{t+1}` after a burn-in.
#[pyfunction]
#[pyo3(signature = (n, model = "sine", innovation = "normal", seed = 42, warmup = DEFAULT_WARMUP))]
fn simulate(
    n: usize,
    model: &str,
    innovation: &str,
    seed: u64,
    warmup: usize,
) -> PyResult<Vec<f64>> {
    let spec = DgpSpec {
        model: model.parse::<DgpModel>().map_err(to_py)?,
        innovation: innovation.parse::<Innovation>().map_err(to_py)?,
        n,
        warmup,
        seed,
    };
    Ok(mdcp::simulate(&spec).map_err(to_py)?.values().to_vec())
}

/// Bandwidths `(h, h0)` chosen on the order-`p` embedding of `values`.
#[pyfunction]
#[pyo3(signature = (values, p = 1, mode = "cv"))]
fn select_bandwidths(values: Vec<f64>, p: usize, mode: &str) -> PyResult<(f64, f64)> {
    let pairs = embed(&series(values)?, p).map_err(to_py)?;
    let bw = mdcp::select_bandwidths(&pairs, bandwidth_mode(mode)?).map_err(to_py)?;
    Ok((bw.h, bw.h0))
}

/// Probability integral transforms of the observed pairs.
#[pyfunction]
#[pyo3(signature = (values, h, h0, p = 1, loo = false))]
fn transform_ranks(values: Vec<f64>, h: f64, h0: f64, p: usize, loo: bool) -> PyResult<Vec<f64>> {
    let pairs = embed(&series(values)?, p).map_err(to_py)?;
    let bw = Bandwidths::new(h, h0).map_err(to_py)?;
    mdcp::transform_ranks(&pairs, bw, loo).map_err(to_py)
}

/// Conformal p-value of `y` as the next value of `values`.
#[pyfunction]
#[pyo3(signature = (values, y, h, h0, p = 1, predictive = false))]
fn mdcp_pvalue(
    values: Vec<f64>,
    y: f64,
    h: f64,
    h0: f64,
    p: usize,
    predictive: bool,
) -> PyResult<f64> {
    let s = series(values)?;
    let pairs = embed(&s, p).map_err(to_py)?;
    let x_n = last_predictor(&s, p).map_err(to_py)?;
    let bw = Bandwidths::new(h, h0).map_err(to_py)?;
    mdcp::mdcp_pvalue(&pairs, bw, &x_n, y, predictive).map_err(to_py)
}

/// Prediction interval for the value following `values`.
#[pyfunction]
#[pyo3(signature = (
    values, method = "mdcp", alpha = 0.05, p = 1, bandwidth = "cv",
    grid_size = 200, replicates = 250, warmup = 100, seed = 42
))]
#[allow(clippy::too_many_arguments)]
fn predict(
    py: Python<'_>,
    values: Vec<f64>,
    method: &str,
    alpha: f64,
    p: usize,
    bandwidth: &str,
    grid_size: usize,
    replicates: usize,
    warmup: usize,
    seed: u64,
) -> PyResult<Interval> {
    let cfg = predictor(method, alpha, p, bandwidth, grid_size, replicates, warmup)?;
    let s = series(values)?;
    let pred = py
        .detach(|| mdcp::predict_next(&s, &cfg, seed))
        .map_err(to_py)?;
    Ok(Interval {
        lower: pred.interval.lower,
        upper: pred.interval.upper,
        alpha,
        method: cfg.method.as_str().to_string(),
        h: pred.bandwidths.h,
        h0: pred.bandwidths.h0,
    })
}

/// Monte Carlo coverage study; returns means, standard deviations and per-replication values.
#[pyfunction]
#[pyo3(signature = (
    n, method = "mdcp", alpha = 0.1, replications = 100, futures = 1000,
    model = "sine", innovation = "normal", p = 1, bandwidth = "cv",
    grid_size = 200, replicates = 250, warmup = 100, seed = 42
))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo<'py>(
    py: Python<'py>,
    n: usize,
    method: &str,
    alpha: f64,
    replications: usize,
    futures: usize,
    model: &str,
    innovation: &str,
    p: usize,
    bandwidth: &str,
    grid_size: usize,
    replicates: usize,
    warmup: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = predictor(method, alpha, p, bandwidth, grid_size, replicates, warmup)?;
    let spec = DgpSpec {
        model: model.parse::<DgpModel>().map_err(to_py)?,
        innovation: innovation.parse::<Innovation>().map_err(to_py)?,
        n,
        warmup: DEFAULT_WARMUP,
        seed,
    };
    let rep = py
        .detach(|| mdcp::monte_carlo(&spec, &cfg, replications, futures))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("cvr", rep.cvr_mean)?;
    d.set_item("len", rep.len_mean)?;
    d.set_item("cvr_sd", rep.cvr_sd)?;
    d.set_item("len_sd", rep.len_sd)?;
    d.set_item(
        "cvr_values",
        rep.outcomes.iter().map(|o| o.cvr).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "len_values",
        rep.outcomes.iter().map(|o| o.len).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "failed",
        rep.failures
            .iter()
            .map(|f| f.replication)
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Rolling one-step-ahead evaluation with window `w`.
#[pyfunction]
#[pyo3(signature = (
    values, w, method = "mdcp", alpha = 0.1, p = 1, bandwidth = "cv",
    grid_size = 200, replicates = 250, warmup = 100, seed = 42
))]
#[allow(clippy::too_many_arguments)]
fn rolling_eval<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    w: usize,
    method: &str,
    alpha: f64,
    p: usize,
    bandwidth: &str,
    grid_size: usize,
    replicates: usize,
    warmup: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = predictor(method, alpha, p, bandwidth, grid_size, replicates, warmup)?;
    let s = series(values)?;
    let rep = py
        .detach(|| rolling_eval_rs(&s, w, &cfg, seed))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("cvr", rep.cvr)?;
    d.set_item("len", rep.len)?;
    d.set_item("len_sd", rep.len_sd)?;
    let steps: Vec<(usize, f64, f64, f64, bool)> = rep
        .steps
        .iter()
        .map(|s| (s.t, s.lower, s.upper, s.actual, s.hit))
        .collect();
    d.set_item("steps", steps)?;
    d.set_item(
        "failed",
        rep.failures.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pymodule]
fn pymdcp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Interval>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(select_bandwidths, m)?)?;
    m.add_function(wrap_pyfunction!(transform_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(mdcp_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_eval, m)?)?;
    Ok(())
}
