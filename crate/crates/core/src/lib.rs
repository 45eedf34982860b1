//! One-step-ahead prediction intervals for stationary Markov(p) time series.
//!
//! Four interval constructions share one kernel-smoothed conditional CDF estimator:
//!
//! * [`conformal`]: full distributional conformal prediction (MDCP) and its
//!   leave-one-out variant (PMDCP);
//! * [`bootstrap`]: model-free (MF) and predictive model-free (PMF) bootstrap.
//!
//! [`dgp_eval`] holds the simulation models and coverage metrics used to
//! evaluate them, and [`cli`] the command-line front end.

pub mod bandwidth;
pub mod bootstrap;
pub mod cdf;
pub mod cli;
pub mod conformal;
pub mod dgp_eval;
pub mod error;
pub mod kernels;
pub mod predict;
pub mod seeds;
pub mod series;

pub use bandwidth::{cv_select, rule_of_thumb, select_bandwidths, BandwidthGrid, BandwidthMode};
pub use bootstrap::{mf_interval, BootstrapConfig, BootstrapResult};
pub use cdf::{estimate_loo, transform_ranks, ConditionalCdfModel};
pub use conformal::{build_trial_grid, conformal_interval, mdcp_pvalue, ConformalTrace, TrialGrid};
pub use dgp_eval::{
    monte_carlo, rolling_eval, simulate, CoverageReport, DgpModel, DgpSpec, Innovation,
};
pub use error::{Error, Result};
pub use kernels::Bandwidths;
pub use predict::{predict_next, Prediction, PredictorConfig};
pub use series::{
    embed, last_predictor, Alpha, EmbeddedPairs, Method, PredictionInterval, TimeSeries,
};
