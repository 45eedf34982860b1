//! Kernel-smoothed conditional CDF `F(y | x)`, its leave-one-out variant and
//! its numerical inverse.
//!
//! ```text
//!            sum_i W_h(X_i, x) K((y - Y_i) / h0)
//! F(y | x) = -----------------------------------
//!                    sum_i W_h(X_i, x)
//! ```
//!
//! Weights are accumulated in log space and shifted by their maximum before
//! exponentiating, so the ratio stays defined for query points far from the data.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{log_product_weight, smooth_cdf_kernel, Bandwidths, KERNEL_SUPPORT};
use crate::series::{check_dim, EmbeddedPairs};

const INVERT_TOL: f64 = 1e-8;
const INVERT_MAX_ITER: usize = 200;

/// A fitted conditional CDF estimator over a fixed pair set.
///
/// Pairs are kept sorted by response so that evaluation only needs kernel
/// terms for responses within `2 h0` of the query.
#[derive(Debug, Clone)]
pub struct ConditionalCdfModel {
    order: usize,
    bw: Bandwidths,
    predictors: Vec<f64>,
    responses: Vec<f64>,
}

impl ConditionalCdfModel {
    pub fn new(pairs: &EmbeddedPairs, bw: Bandwidths) -> Self {
        Self::from_rows(pairs.order(), bw, pairs.iter())
    }

    /// Estimator on `pairs` plus one augmenting pair `(x, y)`.
    pub fn with_augment(pairs: &EmbeddedPairs, bw: Bandwidths, x: &[f64], y: f64) -> Result<Self> {
        check_dim(pairs.order(), x)?;
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index: 0, value: y });
        }
        Ok(Self::from_rows(
            pairs.order(),
            bw,
            pairs.iter().chain(std::iter::once((x, y))),
        ))
    }

    fn from_rows<'a>(
        order: usize,
        bw: Bandwidths,
        rows: impl Iterator<Item = (&'a [f64], f64)>,
    ) -> Self {
        let mut rows: Vec<(&[f64], f64)> = rows.collect();
        rows.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut predictors = Vec::with_capacity(rows.len() * order);
        let mut responses = Vec::with_capacity(rows.len());
        for (x, y) in rows {
            predictors.extend_from_slice(x);
            responses.push(y);
        }
        Self {
            order,
            bw,
            predictors,
            responses,
        }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn bandwidths(&self) -> Bandwidths {
        self.bw
    }

    /// `[min Y - 2 h0, max Y + 2 h0]`; the estimate is 0 left of it and 1 right of it.
    pub fn support(&self) -> (f64, f64) {
        let pad = KERNEL_SUPPORT * self.bw.h0;
        (
            self.responses[0] - pad,
            self.responses[self.responses.len() - 1] + pad,
        )
    }

    /// Conditional distribution at a fixed predictor value.
    pub fn at(&self, x: &[f64]) -> Result<LocalCdf<'_>> {
        check_dim(self.order, x)?;
        let log_w: Vec<f64> = self
            .predictors
            .chunks_exact(self.order)
            .map(|xi| log_product_weight(xi, x, self.bw.h))
            .collect();
        let weights = shifted_weights(log_w)?;
        let mut cumulative = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(LocalCdf {
            responses: &self.responses,
            weights,
            cumulative,
            h0: self.bw.h0,
        })
    }

    pub fn estimate(&self, x: &[f64], y: f64) -> Result<f64> {
        Ok(self.at(x)?.cdf(y))
    }

    /// Smallest `y` with `F(y | x) >= v`, by bisection over [`support`](Self::support).
    pub fn invert(&self, x: &[f64], v: f64) -> Result<f64> {
        self.at(x)?.quantile(v)
    }
}

/// `F(. | x)` for one predictor value: weights over the sorted responses.
#[derive(Debug, Clone)]
pub struct LocalCdf<'a> {
    responses: &'a [f64],
    /// Max-shifted, unnormalized; `cumulative` holds their running sums.
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    h0: f64,
}

impl LocalCdf<'_> {
    pub fn cdf(&self, y: f64) -> f64 {
        let pad = KERNEL_SUPPORT * self.h0;
        let r = self.responses;
        // Responses at or below y - 2h0 contribute their full weight, those at or
        // above y + 2h0 contribute nothing.
        let lo = r.partition_point(|&v| v <= y - pad);
        if lo == r.len() {
            return 1.0;
        }
        let hi = r.partition_point(|&v| v < y + pad);
        if hi == 0 {
            return 0.0;
        }
        let mut acc = self.cumulative[lo];
        for (w, v) in self.weights[lo..hi].iter().zip(&r[lo..hi]) {
            acc += w * smooth_cdf_kernel((y - v) / self.h0);
        }
        (acc / self.cumulative[r.len()]).clamp(0.0, 1.0)
    }

    pub fn support(&self) -> (f64, f64) {
        let pad = KERNEL_SUPPORT * self.h0;
        (
            self.responses[0] - pad,
            self.responses[self.responses.len() - 1] + pad,
        )
    }

    pub fn quantile(&self, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidProbability(v));
        }
        let (mut lo, mut hi) = self.support();
        if v == 0.0 {
            return Ok(lo);
        }
        // ITP root bracketing: bisection's worst case with secant-like
        // convergence on smooth stretches. Keeps F(lo) < v <= F(hi).
        let (mut f_lo, mut f_hi) = (-v, 1.0 - v);
        let eps = 0.5 * INVERT_TOL;
        let k1 = 0.2 / (hi - lo);
        let n_max = ((hi - lo) / INVERT_TOL).log2().ceil().max(0.0) as i32 + 1;
        for j in 0..INVERT_MAX_ITER as i32 {
            let width = hi - lo;
            if width <= INVERT_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r = (eps * 2f64.powi(n_max - j) - 0.5 * width).max(0.0);
            let delta = k1 * width * width;
            let falsi = if f_hi > f_lo {
                (f_hi * lo - f_lo * hi) / (f_hi - f_lo)
            } else {
                mid
            };
            let sigma = (mid - falsi).signum();
            let truncated = if delta <= (mid - falsi).abs() {
                falsi + sigma * delta
            } else {
                mid
            };
            let mut x = if (truncated - mid).abs() <= r {
                truncated
            } else {
                mid - sigma * r
            };
            if !(x > lo && x < hi) {
                x = mid;
            }
            let f = self.cdf(x) - v;
            if f >= 0.0 {
                hi = x;
                f_hi = f;
            } else {
                lo = x;
                f_lo = f;
            }
        }
        Ok(hi)
    }
}

/// Exponentiates log weights after shifting by their maximum (so the largest is 1).
fn shifted_weights(mut log_w: Vec<f64>) -> Result<Vec<f64>> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    for lw in log_w.iter_mut() {
        *lw = (*lw - max).exp();
    }
    Ok(log_w)
}

/// Exponentiates log weights after a max shift and normalizes them to sum to one.
pub(crate) fn normalize_log_weights(log_w: Vec<f64>) -> Result<Vec<f64>> {
    let mut w = shifted_weights(log_w)?;
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    for v in w.iter_mut() {
        *v /= total;
    }
    Ok(w)
}

/// Direct ratio over every pair except `skip`.
fn direct_estimate(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    skip: Option<usize>,
    x: &[f64],
    y: f64,
) -> Result<f64> {
    let mut log_w = Vec::with_capacity(pairs.len());
    let mut kern = Vec::with_capacity(pairs.len());
    for (i, (xi, yi)) in pairs.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        log_w.push(log_product_weight(xi, x, bw.h));
        kern.push(smooth_cdf_kernel((y - yi) / bw.h0));
    }
    let weights = shifted_weights(log_w)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (w, k) in weights.iter().zip(&kern) {
        num += w * k;
        den += w;
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Leave-one-out estimate: pair `t` is removed from numerator and denominator.
pub fn estimate_loo(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    t: usize,
    x: &[f64],
    y: f64,
) -> Result<f64> {
    if t >= pairs.len() {
        return Err(Error::InvalidIndex {
            index: t,
            len: pairs.len(),
        });
    }
    pairs.check_query(x)?;
    direct_estimate(pairs, bw, Some(t), x, y)
}

/// Probability integral transform of every pair at its own `(X_{t-1}, Y_t)`,
/// optionally leaving the pair itself out.
pub fn transform_ranks(pairs: &EmbeddedPairs, bw: Bandwidths, loo: bool) -> Result<Vec<f64>> {
    (0..pairs.len())
        .into_par_iter()
        .map(|t| {
            let skip = if loo { Some(t) } else { None };
            direct_estimate(pairs, bw, skip, pairs.predictor(t), pairs.response(t))
        })
        .collect()
}
