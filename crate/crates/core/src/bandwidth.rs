//! Bandwidth selection for the conditional CDF estimator.
//!
//! [`cv_select`] minimizes the leave-one-out least-squares criterion
//!
//! ```text
//! CV(h, h0) = sum_t sum_s [ 1{Y_t <= Y_s} - F_{-t}(Y_s | X_t) ]^2
//! ```
//!
//! over a finite grid. For a fixed `h` the leave-one-out weights form an
//! `N x N` row-stochastic matrix, and for a fixed `h0` the kernel values form
//! an `E x N` matrix, so every grid cell costs one matrix product.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cdf::normalize_log_weights;
use crate::error::{Error, Result};
use crate::kernels::{log_product_weight, smooth_cdf_kernel, Bandwidths};
use crate::series::EmbeddedPairs;

/// Multipliers applied to the rule-of-thumb values to build the default grid.
pub const GRID_MULTIPLIERS: [f64; 7] = [
    0.25,
    0.5,
    std::f64::consts::FRAC_1_SQRT_2,
    1.0,
    std::f64::consts::SQRT_2,
    2.0,
    4.0,
];

/// Evaluation points beyond this count are subsampled.
pub const MAX_EVAL_POINTS: usize = 2000;
const SUBSAMPLE_SEED: u64 = 0x5eed_cafe;

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid {
    h: Vec<f64>,
    h0: Vec<f64>,
}

impl BandwidthGrid {
    pub fn new(h: Vec<f64>, h0: Vec<f64>) -> Result<Self> {
        for (name, v) in [("h", &h), ("h0", &h0)] {
            if v.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} candidates are empty")));
            }
            if v.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                return Err(Error::InvalidGrid(format!(
                    "{name} candidates must be positive"
                )));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!(
                    "{name} candidates must be strictly increasing"
                )));
            }
        }
        Ok(Self { h, h0 })
    }

    /// The default 7 x 7 log-spaced grid centred on `center`.
    pub fn around(center: Bandwidths) -> Self {
        Self {
            h: GRID_MULTIPLIERS.iter().map(|m| m * center.h).collect(),
            h0: GRID_MULTIPLIERS.iter().map(|m| m * center.h0).collect(),
        }
    }

    pub fn h_candidates(&self) -> &[f64] {
        &self.h
    }

    pub fn h0_candidates(&self) -> &[f64] {
        &self.h0
    }

    pub fn len(&self) -> usize {
        self.h.len() * self.h0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `h = sigma n^{-1/(4+p)}`, `h0 = sigma n^{-2/(4+p)}`.
pub fn rule_of_thumb(n: usize, p: usize, sigma_hat: f64) -> Result<Bandwidths> {
    if p == 0 {
        return Err(Error::ZeroOrder);
    }
    if n < p + 2 {
        return Err(Error::OrderTooLarge { n, p });
    }
    if !(sigma_hat.is_finite() && sigma_hat > 0.0) {
        return Err(Error::DegenerateData(format!(
            "scale estimate must be positive, got {sigma_hat}"
        )));
    }
    let rate = 1.0 / (4.0 + p as f64);
    let nf = n as f64;
    Bandwidths::new(sigma_hat * nf.powf(-rate), sigma_hat * nf.powf(-2.0 * rate))
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Rule-of-thumb bandwidths for a pair set, scaled by the response standard deviation.
pub fn rule_of_thumb_for(pairs: &EmbeddedPairs) -> Result<Bandwidths> {
    rule_of_thumb(
        pairs.len() + pairs.order(),
        pairs.order(),
        sample_sd(pairs.responses()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvPoint {
    pub bandwidths: Bandwidths,
    pub score: f64,
}

fn eval_indices(n: usize) -> Vec<usize> {
    if n <= MAX_EVAL_POINTS {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SUBSAMPLE_SEED);
        let mut idx = sample(&mut rng, n, MAX_EVAL_POINTS).into_vec();
        idx.sort_unstable();
        idx
    }
}

fn check_cv_input(pairs: &EmbeddedPairs) -> Result<()> {
    if pairs.len() < 3 {
        return Err(Error::OrderTooLarge {
            n: pairs.len() + pairs.order(),
            p: pairs.order(),
        });
    }
    let y = pairs.responses();
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::DegenerateData(
            "all responses are identical; the CV criterion is constant".into(),
        ));
    }
    Ok(())
}

fn loo_weight_matrix(pairs: &EmbeddedPairs, h: f64) -> Result<Array2<f64>> {
    let n = pairs.len();
    let mut out = Array2::<f64>::zeros((n, n));
    for t in 0..n {
        let xt = pairs.predictor(t);
        let log_w: Vec<f64> = (0..n)
            .filter(|&i| i != t)
            .map(|i| log_product_weight(pairs.predictor(i), xt, h))
            .collect();
        let w = normalize_log_weights(log_w)?;
        let mut row = out.row_mut(t);
        for (k, i) in (0..n).filter(|&i| i != t).enumerate() {
            row[i] = w[k];
        }
    }
    Ok(out)
}

/// Kernel values `K((Y_s - Y_i) / h0)`, transposed to `N x E` for the product.
fn kernel_matrix(y: &[f64], eval: &[usize], h0: f64) -> Array2<f64> {
    Array2::from_shape_fn((y.len(), eval.len()), |(i, s)| {
        smooth_cdf_kernel((y[eval[s]] - y[i]) / h0)
    })
}

/// CV criterion at every grid cell, ordered by `h` then `h0`.
pub fn cv_profile(pairs: &EmbeddedPairs, grid: &BandwidthGrid) -> Result<Vec<CvPoint>> {
    check_cv_input(pairs)?;
    let y = pairs.responses();
    let eval = eval_indices(pairs.len());
    let indicator = Array2::from_shape_fn((y.len(), eval.len()), |(t, s)| {
        if y[t] <= y[eval[s]] {
            1.0
        } else {
            0.0
        }
    });

    let weights: Vec<Array2<f64>> = grid
        .h
        .par_iter()
        .map(|&h| loo_weight_matrix(pairs, h))
        .collect::<Result<_>>()?;
    let kernels: Vec<Array2<f64>> = grid
        .h0
        .par_iter()
        .map(|&h0| kernel_matrix(y, &eval, h0))
        .collect();

    let cells: Vec<(usize, usize)> = (0..grid.h.len())
        .flat_map(|a| (0..grid.h0.len()).map(move |b| (a, b)))
        .collect();
    let scores: Vec<f64> = cells
        .par_iter()
        .map(|&(a, b)| {
            let fitted = weights[a].dot(&kernels[b]);
            fitted
                .iter()
                .zip(indicator.iter())
                .map(|(f, i)| (i - f) * (i - f))
                .sum()
        })
        .collect();

    Ok(cells
        .iter()
        .zip(scores)
        .map(|(&(a, b), score)| CvPoint {
            bandwidths: Bandwidths {
                h: grid.h[a],
                h0: grid.h0[b],
            },
            score,
        })
        .collect())
}

/// Grid argmin of the CV criterion; ties go to the smaller `h`, then the smaller `h0`.
pub fn cv_select(pairs: &EmbeddedPairs, grid: &BandwidthGrid) -> Result<Bandwidths> {
    let profile = cv_profile(pairs, grid)?;
    let mut best = profile[0];
    for point in &profile[1..] {
        if point.score < best.score {
            best = *point;
        }
    }
    if !best.score.is_finite() {
        return Err(Error::DegenerateData("CV criterion is not finite".into()));
    }
    Ok(best.bandwidths)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthMode {
    /// CV over the default grid around the rule-of-thumb values.
    Cv,
    RuleOfThumb,
    Fixed(Bandwidths),
}

pub fn select_bandwidths(pairs: &EmbeddedPairs, mode: BandwidthMode) -> Result<Bandwidths> {
    match mode {
        BandwidthMode::Fixed(bw) => Ok(bw),
        BandwidthMode::RuleOfThumb => rule_of_thumb_for(pairs),
        BandwidthMode::Cv => {
            let grid = BandwidthGrid::around(rule_of_thumb_for(pairs)?);
            cv_select(pairs, &grid)
        }
    }
}
