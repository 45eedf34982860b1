//! Full distributional conformal prediction for Markov(p) data (MDCP and its
//! leave-one-out variant PMDCP).
//!
//! For a candidate `y` the pair `(X_n, y)` is appended to the data, every
//! pair gets a conditional rank `U_t` under the augmented estimator, and the
//! candidate's p-value is the fraction of scores `|U_t - 1/2|` at least as
//! large as its own. Only the augmenting pair changes between candidates, so
//! all sums over the observed pairs are computed once in [`ConformalScorer::new`]
//! and each candidate costs `O(N)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{log_product_weight, smooth_cdf_kernel, Bandwidths};
use crate::series::{check_dim, Alpha, EmbeddedPairs, Method, PredictionInterval, TimeSeries};

/// Half-width of the grid used when every observation is zero.
pub const DEGENERATE_GRID_HALF_WIDTH: f64 = 1e-8;

/// Candidate values for the next observation, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialGrid {
    points: Vec<f64>,
}

impl TrialGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("need at least two trial points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("trial points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "trial points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance between neighbouring points of an evenly spaced grid.
    pub fn step(&self) -> f64 {
        (self.points[self.points.len() - 1] - self.points[0]) / (self.points.len() - 1) as f64
    }
}

/// `count` evenly spaced points over `[-max|Y|, max|Y|]`.
pub fn build_trial_grid(series: &TimeSeries, count: usize) -> Result<TrialGrid> {
    if count < 2 {
        return Err(Error::InvalidGrid(format!(
            "grid size must be at least 2, got {count}"
        )));
    }
    let m = series.max_abs();
    if m == 0.0 {
        return TrialGrid::new(vec![
            -DEGENERATE_GRID_HALF_WIDTH,
            DEGENERATE_GRID_HALF_WIDTH,
        ]);
    }
    let step = 2.0 * m / (count - 1) as f64;
    let mut points: Vec<f64> = (0..count).map(|k| -m + k as f64 * step).collect();
    points[count - 1] = m;
    TrialGrid::new(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub y: f64,
    pub pvalue: f64,
    pub accepted: bool,
}

/// Per-candidate p-values from one grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalTrace {
    /// Size of the augmented data set, `N_pairs + 1`; every p-value is a multiple of `1/N`.
    pub augmented_len: usize,
    pub points: Vec<TracePoint>,
}

/// Precomputed sums for scoring candidates at a fixed `X_n`.
#[derive(Debug, Clone)]
pub struct ConformalScorer {
    h0: f64,
    responses: Vec<f64>,
    /// Per observed pair t: kernel-weighted numerator over the observed pairs.
    numer: Vec<f64>,
    /// Per observed pair t: weight sum over the observed pairs.
    denom: Vec<f64>,
    /// Per observed pair t: weight of the augmenting pair, same scale as `numer`/`denom`.
    aug_weight: Vec<f64>,
    /// Candidate row: weights of the observed pairs at `X_n`.
    cand_weights: Vec<f64>,
    /// Candidate row: the candidate's own weight (zero in the leave-one-out variant).
    cand_self: f64,
}

impl ConformalScorer {
    pub fn new(
        pairs: &EmbeddedPairs,
        bw: Bandwidths,
        x_n: &[f64],
        predictive: bool,
    ) -> Result<Self> {
        check_dim(pairs.order(), x_n)?;
        if x_n.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                index: 0,
                value: f64::NAN,
            });
        }
        let n = pairs.len();
        let y = pairs.responses();
        let mut numer = Vec::with_capacity(n);
        let mut denom = Vec::with_capacity(n);
        let mut aug_weight = Vec::with_capacity(n);
        let mut log_w = vec![0.0; n];
        for t in 0..n {
            let xt = pairs.predictor(t);
            let mut max = f64::NEG_INFINITY;
            for (i, lw) in log_w.iter_mut().enumerate() {
                if predictive && i == t {
                    continue;
                }
                *lw = log_product_weight(pairs.predictor(i), xt, bw.h);
                max = max.max(*lw);
            }
            let log_aug = log_product_weight(x_n, xt, bw.h);
            max = max.max(log_aug);
            if !max.is_finite() {
                return Err(Error::DegenerateWeights);
            }
            let (mut a, mut d) = (0.0, 0.0);
            for i in 0..n {
                if predictive && i == t {
                    continue;
                }
                let w = (log_w[i] - max).exp();
                d += w;
                a += w * smooth_cdf_kernel((y[t] - y[i]) / bw.h0);
            }
            numer.push(a);
            denom.push(d);
            aug_weight.push((log_aug - max).exp());
        }

        let cand_log: Vec<f64> = pairs
            .iter()
            .map(|(xi, _)| log_product_weight(xi, x_n, bw.h))
            .collect();
        let self_log = if predictive {
            f64::NEG_INFINITY
        } else {
            log_product_weight(x_n, x_n, bw.h)
        };
        let max = cand_log.iter().copied().fold(self_log, f64::max);
        if !max.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        let cand_weights = cand_log.iter().map(|lw| (lw - max).exp()).collect();
        let cand_self = (self_log - max).exp();

        Ok(Self {
            h0: bw.h0,
            responses: y.to_vec(),
            numer,
            denom,
            aug_weight,
            cand_weights,
            cand_self,
        })
    }

    /// `N_pairs + 1`.
    pub fn augmented_len(&self) -> usize {
        self.responses.len() + 1
    }

    /// Conditional ranks of all augmented pairs for candidate `y`; the candidate's rank is last.
    pub fn ranks(&self, y: f64) -> Vec<f64> {
        let h0 = self.h0;
        let mut ranks: Vec<f64> = (0..self.responses.len())
            .map(|t| {
                let c = self.aug_weight[t];
                let k = smooth_cdf_kernel((self.responses[t] - y) / h0);
                ((self.numer[t] + c * k) / (self.denom[t] + c)).clamp(0.0, 1.0)
            })
            .collect();
        let (mut num, mut den) = (0.5 * self.cand_self, self.cand_self);
        for (w, yi) in self.cand_weights.iter().zip(&self.responses) {
            num += w * smooth_cdf_kernel((y - yi) / h0);
            den += w;
        }
        ranks.push((num / den).clamp(0.0, 1.0));
        ranks
    }

    pub fn pvalue(&self, y: f64) -> f64 {
        let ranks = self.ranks(y);
        let (cand, rest) = ranks.split_last().expect("augmented set is never empty");
        let cand_score = (cand - 0.5).abs();
        let count = 1 + rest
            .iter()
            .filter(|u| (*u - 0.5).abs() >= cand_score)
            .count();
        count as f64 / ranks.len() as f64
    }
}

/// Conformal p-value of a single candidate value for `Y_{n+1}`.
pub fn mdcp_pvalue(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    x_n: &[f64],
    y_cand: f64,
    predictive: bool,
) -> Result<f64> {
    Ok(ConformalScorer::new(pairs, bw, x_n, predictive)?.pvalue(y_cand))
}

/// Scans the trial grid and returns the hull of `{y : p(y) > alpha}` together with the trace.
pub fn conformal_interval(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    x_n: &[f64],
    grid: &TrialGrid,
    alpha: Alpha,
    predictive: bool,
) -> Result<(PredictionInterval, ConformalTrace)> {
    let scorer = ConformalScorer::new(pairs, bw, x_n, predictive)?;
    let pvalues: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&y| scorer.pvalue(y))
        .collect();
    let trace = ConformalTrace {
        augmented_len: scorer.augmented_len(),
        points: grid
            .points()
            .iter()
            .zip(pvalues)
            .map(|(&y, pvalue)| TracePoint {
                y,
                pvalue,
                accepted: pvalue > alpha.value(),
            })
            .collect(),
    };
    let interval = interval_from_trace(&trace, alpha, predictive)?;
    Ok((interval, trace))
}

/// Convex hull of the accepted candidates in `trace` at level `alpha`.
pub fn interval_from_trace(
    trace: &ConformalTrace,
    alpha: Alpha,
    predictive: bool,
) -> Result<PredictionInterval> {
    let mut accepted = trace.points.iter().filter(|p| p.pvalue > alpha.value());
    let first = accepted.next().ok_or(Error::EmptyAcceptedSet {
        alpha: alpha.value(),
    })?;
    let last = accepted.next_back().unwrap_or(first);
    let method = if predictive {
        Method::Pmdcp
    } else {
        Method::Mdcp
    };
    PredictionInterval::new(first.y, last.y, alpha, method)
}
