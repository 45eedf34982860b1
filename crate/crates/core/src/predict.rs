//! Fit-and-predict entry point shared by the evaluation harness, the CLI and
//! the Python bindings.

use crate::bandwidth::{select_bandwidths, BandwidthMode};
use crate::bootstrap::{mf_interval, BootstrapConfig, BootstrapResult};
use crate::conformal::{build_trial_grid, conformal_interval, ConformalTrace};
use crate::error::Result;
use crate::kernels::Bandwidths;
use crate::series::{embed, last_predictor, Alpha, Method, PredictionInterval, TimeSeries};

/// Everything needed to turn a series into an interval for its next value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorConfig {
    pub method: Method,
    /// Markov order `p`.
    pub order: usize,
    pub alpha: Alpha,
    pub bandwidth: BandwidthMode,
    /// Trial-grid size for the conformal methods.
    pub grid_size: usize,
    /// Bootstrap replicates `B`.
    pub replicates: usize,
    /// Bootstrap warm-up `M`.
    pub warmup: usize,
}

impl PredictorConfig {
    pub fn new(method: Method, alpha: Alpha) -> Self {
        Self {
            method,
            order: 1,
            alpha,
            bandwidth: BandwidthMode::Cv,
            grid_size: 200,
            replicates: 250,
            warmup: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub interval: PredictionInterval,
    pub bandwidths: Bandwidths,
    /// Grid scan, for the conformal methods.
    pub trace: Option<ConformalTrace>,
    /// Roots and point predictor, for the bootstrap methods.
    pub bootstrap: Option<BootstrapResult>,
}

/// Selects bandwidths on `series`, then builds the configured interval for the next value.
/// `seed` drives the bootstrap; the conformal methods are deterministic.
pub fn predict_next(series: &TimeSeries, cfg: &PredictorConfig, seed: u64) -> Result<Prediction> {
    let pairs = embed(series, cfg.order)?;
    let x_n = last_predictor(series, cfg.order)?;
    let bandwidths = select_bandwidths(&pairs, cfg.bandwidth)?;
    if cfg.method.is_conformal() {
        let grid = build_trial_grid(series, cfg.grid_size)?;
        let (interval, trace) = conformal_interval(
            &pairs,
            bandwidths,
            &x_n,
            &grid,
            cfg.alpha,
            cfg.method.is_predictive(),
        )?;
        Ok(Prediction {
            interval,
            bandwidths,
            trace: Some(trace),
            bootstrap: None,
        })
    } else {
        let boot = mf_interval(
            &pairs,
            bandwidths,
            &x_n,
            cfg.alpha,
            BootstrapConfig {
                replicates: cfg.replicates,
                warmup: cfg.warmup,
                seed,
            },
            cfg.method.is_predictive(),
        )?;
        Ok(Prediction {
            interval: boot.interval,
            bandwidths,
            trace: None,
            bootstrap: Some(boot),
        })
    }
}
