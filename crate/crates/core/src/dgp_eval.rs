//! Simulation models, oracle futures and the coverage/length metrics used to
//! evaluate interval methods, both by Monte Carlo replication and by rolling
//! one-step-ahead evaluation on a fixed series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::bandwidth::sample_sd;
use crate::error::{Error, Result};
use crate::predict::{predict_next, PredictorConfig};
use crate::seeds::{derive_seed, stream};
use crate::series::{PredictionInterval, TimeSeries};

/// Conditional mean map `g` in `Y_{t+1} = g(Y_t) + e_{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgpModel {
    /// `g(y) = sin(y)`.
    Sine,
    /// `g(y) = 0.8 ln(3 y^2 + 1)`.
    LogQuad,
}

impl DgpModel {
    pub fn mean(self, y: f64) -> f64 {
        match self {
            DgpModel::Sine => y.sin(),
            DgpModel::LogQuad => 0.8 * (3.0 * y * y + 1.0).ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DgpModel::Sine => "sine",
            DgpModel::LogQuad => "logquad",
        }
    }
}

impl std::str::FromStr for DgpModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sine" | "1" | "model1" => Ok(DgpModel::Sine),
            "logquad" | "2" | "model2" => Ok(DgpModel::LogQuad),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Innovation {
    /// Standard normal.
    Normal,
    /// Laplace with scale `1/sqrt(2)`, i.e. unit variance.
    LaplaceUnitVar,
}

impl Innovation {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => rng.sample(StandardNormal),
            Innovation::LaplaceUnitVar => {
                let a: f64 = rng.sample(Exp1);
                let b: f64 = rng.sample(Exp1);
                (a - b) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::LaplaceUnitVar => "laplace",
        }
    }
}

impl std::str::FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Innovation::Normal),
            "laplace" => Ok(Innovation::LaplaceUnitVar),
            other => Err(Error::InvalidConfig(format!(
                "unknown innovation law `{other}`"
            ))),
        }
    }
}

pub const DEFAULT_WARMUP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DgpSpec {
    pub model: DgpModel,
    pub innovation: Innovation,
    pub n: usize,
    /// Burn-in steps discarded before the returned sample.
    pub warmup: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(model: DgpModel, innovation: Innovation, n: usize, seed: u64) -> Self {
        Self {
            model,
            innovation,
            n,
            warmup: DEFAULT_WARMUP,
            seed,
        }
    }
}

/// Runs `Y_{t+1} = g(Y_t) + e_{t+1}` from `Y_0 = 0` for `warmup + n` steps and
/// keeps the last `n`; `noise` supplies the innovations in order.
pub fn simulate_with(
    model: DgpModel,
    n: usize,
    warmup: usize,
    mut noise: impl FnMut() -> f64,
) -> Result<TimeSeries> {
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "series length must be at least 3, got {n}"
        )));
    }
    let mut y = 0.0;
    let mut out = Vec::with_capacity(n);
    for step in 0..warmup + n {
        y = model.mean(y) + noise();
        if step >= warmup {
            out.push(y);
        }
    }
    TimeSeries::new(out)
}

pub fn simulate(spec: &DgpSpec) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    simulate_with(spec.model, spec.n, spec.warmup, || {
        spec.innovation.sample(&mut rng)
    })
}

/// `count` independent draws of `g(x_n) + e` from the true transition law.
pub fn oracle_futures(spec: &DgpSpec, x_n: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centre = spec.model.mean(x_n);
    (0..count)
        .map(|_| centre + spec.innovation.sample(&mut rng))
        .collect()
}

/// Fraction of `futures` inside the closed interval, and its length.
pub fn cvr_len(interval: &PredictionInterval, futures: &[f64]) -> (f64, f64) {
    let inside = futures.iter().filter(|&&y| interval.contains(y)).count();
    (inside as f64 / futures.len() as f64, interval.length())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub cvr: f64,
    pub len: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub replication: usize,
    /// Data seed of the failed replication.
    pub seed: u64,
    pub error: Error,
}

/// Mean and sample standard deviation of coverage and length over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub cvr_mean: f64,
    pub len_mean: f64,
    pub cvr_sd: f64,
    pub len_sd: f64,
    pub outcomes: Vec<ReplicationOutcome>,
    pub failures: Vec<ReplicationFailure>,
}

impl CoverageReport {
    pub fn from_outcomes(
        outcomes: Vec<ReplicationOutcome>,
        failures: Vec<ReplicationFailure>,
    ) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::DegenerateData("no successful replications".into()));
        }
        let cvr: Vec<f64> = outcomes.iter().map(|o| o.cvr).collect();
        let len: Vec<f64> = outcomes.iter().map(|o| o.len).collect();
        Ok(Self {
            cvr_mean: mean(&cvr),
            len_mean: mean(&len),
            cvr_sd: sample_sd(&cvr),
            len_sd: sample_sd(&len),
            outcomes,
            failures,
        })
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Aborts when more than 1% of replications fail.
fn check_failures(failures: &[ReplicationFailure], total: usize) -> Result<()> {
    if failures.len() * 100 > total {
        let first = &failures[0];
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total,
            first_index: first.replication,
            first_error: first.error.to_string(),
        });
    }
    Ok(())
}

/// Monte Carlo coverage study with an arbitrary interval builder.
///
/// Replication `i` simulates with a seed derived from `spec.seed` and `i`,
/// calls `method(series, method_seed)` and scores the interval against
/// `futures` oracle draws at the last observation.
pub fn monte_carlo_with<F>(
    spec: &DgpSpec,
    replications: usize,
    futures: usize,
    method: F,
) -> Result<CoverageReport>
where
    F: Fn(&TimeSeries, u64) -> Result<PredictionInterval> + Sync,
{
    if replications < 2 {
        return Err(Error::InvalidConfig("need at least 2 replications".into()));
    }
    if futures == 0 {
        return Err(Error::InvalidConfig("need at least 1 oracle future".into()));
    }
    let results: Vec<std::result::Result<ReplicationOutcome, ReplicationFailure>> = (0
        ..replications)
        .into_par_iter()
        .map(|i| {
            let idx = i as u64;
            let data_seed = derive_seed(spec.seed, stream::DATA, idx);
            let fail = |error| ReplicationFailure {
                replication: i,
                seed: data_seed,
                error,
            };
            let series = simulate(&DgpSpec {
                seed: data_seed,
                ..*spec
            })
            .map_err(fail)?;
            let interval =
                method(&series, derive_seed(spec.seed, stream::METHOD, idx)).map_err(fail)?;
            let x_n = series.values()[series.len() - 1];
            let draws = oracle_futures(
                spec,
                x_n,
                futures,
                derive_seed(spec.seed, stream::FUTURES, idx),
            );
            let (cvr, len) = cvr_len(&interval, &draws);
            Ok(ReplicationOutcome {
                replication: i,
                cvr,
                len,
            })
        })
        .collect();

    let mut outcomes = Vec::with_capacity(replications);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(f) => failures.push(f),
        }
    }
    check_failures(&failures, replications)?;
    CoverageReport::from_outcomes(outcomes, failures)
}

/// Monte Carlo coverage study of one of the four interval methods.
pub fn monte_carlo(
    spec: &DgpSpec,
    cfg: &PredictorConfig,
    replications: usize,
    futures: usize,
) -> Result<CoverageReport> {
    monte_carlo_with(spec, replications, futures, |series, seed| {
        predict_next(series, cfg, seed).map(|p| p.interval)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingStep {
    /// 1-based time index of the predicted observation.
    pub t: usize,
    pub lower: f64,
    pub upper: f64,
    pub actual: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingReport {
    pub cvr: f64,
    pub len: f64,
    pub len_sd: f64,
    pub steps: Vec<RollingStep>,
    /// Windows whose interval could not be built, by 1-based target index.
    pub failures: Vec<(usize, Error)>,
}

/// Rolling one-step-ahead evaluation with an arbitrary interval builder.
///
/// For `t = w+1..n` the builder sees `Y_{t-w}..Y_{t-1}` and the interval is
/// checked against `Y_t`. Failed windows are recorded and left out of the averages.
pub fn rolling_eval_with<F>(
    series: &TimeSeries,
    window: usize,
    order: usize,
    seed: u64,
    method: F,
) -> Result<RollingReport>
where
    F: Fn(&TimeSeries, u64) -> Result<PredictionInterval> + Sync,
{
    let n = series.len();
    if window < order + 10 {
        return Err(Error::InvalidConfig(format!(
            "window {window} must be at least p + 10 = {}",
            order + 10
        )));
    }
    if n <= window {
        return Err(Error::OrderTooLarge { n, p: window });
    }
    let y = series.values();
    let results: Vec<std::result::Result<RollingStep, (usize, Error)>> = (window + 1..=n)
        .into_par_iter()
        .map(|t| {
            let train = series.slice(t - 1 - window, t - 1).map_err(|e| (t, e))?;
            let pi =
                method(&train, derive_seed(seed, stream::ROLLING, t as u64)).map_err(|e| (t, e))?;
            let actual = y[t - 1];
            Ok(RollingStep {
                t,
                lower: pi.lower,
                upper: pi.upper,
                actual,
                hit: pi.contains(actual),
            })
        })
        .collect();

    let mut steps = Vec::with_capacity(n - window);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => steps.push(s),
            Err(f) => failures.push(f),
        }
    }
    if steps.is_empty() {
        let (t, e) = failures.swap_remove(0);
        return Err(Error::DegenerateData(format!(
            "every window failed (first at t={t}: {e})"
        )));
    }
    let hits = steps.iter().filter(|s| s.hit).count();
    let lens: Vec<f64> = steps.iter().map(|s| s.upper - s.lower).collect();
    Ok(RollingReport {
        cvr: hits as f64 / steps.len() as f64,
        len: mean(&lens),
        len_sd: sample_sd(&lens),
        steps,
        failures,
    })
}

pub fn rolling_eval(
    series: &TimeSeries,
    window: usize,
    cfg: &PredictorConfig,
    seed: u64,
) -> Result<RollingReport> {
    rolling_eval_with(series, window, cfg.order, seed, |train, s| {
        predict_next(train, cfg, s).map(|p| p.interval)
    })
}
