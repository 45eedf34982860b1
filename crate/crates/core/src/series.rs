//! Observed series, the lag embedding `(X_{t-1}, Y_t)`, and the small value
//! types shared by every interval method.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An ordered, fully observed real-valued series `Y_1, ..., Y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute observation.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Contiguous sub-series `values[start..end]`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(self.values[start..end].to_vec())
    }
}

/// Regression view of a Markov(p) series: lag vectors paired with the next value.
///
/// Predictors are stored row-major, `order` values per pair, most recent lag first.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPairs {
    order: usize,
    predictors: Vec<f64>,
    responses: Vec<f64>,
}

impl EmbeddedPairs {
    /// Builds a pair set from explicit rows. Requires at least two pairs, all finite.
    pub fn new(order: usize, predictors: Vec<Vec<f64>>, responses: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if predictors.len() != responses.len() {
            return Err(Error::DimensionMismatch {
                expected: responses.len(),
                got: predictors.len(),
            });
        }
        if responses.len() < 2 {
            return Err(Error::OrderTooLarge {
                n: responses.len() + order,
                p: order,
            });
        }
        let mut flat = Vec::with_capacity(order * responses.len());
        for row in &predictors {
            if row.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        check_finite(&flat)?;
        check_finite(&responses)?;
        Ok(Self {
            order,
            predictors: flat,
            responses,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of pairs, `n - p` for an embedded series.
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn predictor(&self, t: usize) -> &[f64] {
        &self.predictors[t * self.order..(t + 1) * self.order]
    }

    pub fn response(&self, t: usize) -> f64 {
        self.responses[t]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[f64], f64)> + '_ {
        self.predictors
            .chunks_exact(self.order)
            .zip(self.responses.iter().copied())
    }

    /// The pair set with one extra `(x, y)` appended at the end.
    pub fn with_pair(&self, x: &[f64], y: f64) -> Result<Self> {
        check_dim(self.order, x)?;
        check_finite(x)?;
        check_finite(&[y])?;
        let mut out = self.clone();
        out.predictors.extend_from_slice(x);
        out.responses.push(y);
        Ok(out)
    }

    pub(crate) fn check_query(&self, x: &[f64]) -> Result<()> {
        check_dim(self.order, x)
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        })
    } else {
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((index, &value)) => Err(Error::NonFiniteInput { index, value }),
        None => Ok(()),
    }
}

/// Pairs `((Y_{t-1}, ..., Y_{t-p}), Y_t)` for `t = p+1..n`, in time order.
pub fn embed(series: &TimeSeries, p: usize) -> Result<EmbeddedPairs> {
    if p == 0 {
        return Err(Error::ZeroOrder);
    }
    let y = series.values();
    let n = y.len();
    if n < p + 2 {
        return Err(Error::OrderTooLarge { n, p });
    }
    let count = n - p;
    let mut predictors = Vec::with_capacity(count * p);
    let mut responses = Vec::with_capacity(count);
    for t in p..n {
        predictors.extend((1..=p).map(|s| y[t - s]));
        responses.push(y[t]);
    }
    Ok(EmbeddedPairs {
        order: p,
        predictors,
        responses,
    })
}

/// The conditioning vector for the next value, `X_n = (Y_n, ..., Y_{n-p+1})`.
pub fn last_predictor(series: &TimeSeries, p: usize) -> Result<Vec<f64>> {
    let y = series.values();
    let n = y.len();
    if p == 0 {
        return Err(Error::ZeroOrder);
    }
    if n < p {
        return Err(Error::OrderTooLarge { n, p });
    }
    Ok(y[n - p..].iter().rev().copied().collect())
}

/// Miscoverage probability `alpha` in `(0, 1)`; the nominal level is `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn level(self) -> f64 {
        1.0 - self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Model-free bootstrap.
    Mf,
    /// Predictive (leave-one-out) model-free bootstrap.
    Pmf,
    /// Markov distributional conformal prediction.
    Mdcp,
    /// Predictive (leave-one-out) MDCP.
    Pmdcp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mf, Method::Pmf, Method::Mdcp, Method::Pmdcp];

    pub fn is_predictive(self) -> bool {
        matches!(self, Method::Pmf | Method::Pmdcp)
    }

    pub fn is_conformal(self) -> bool {
        matches!(self, Method::Mdcp | Method::Pmdcp)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mf => "MF",
            Method::Pmf => "PMF",
            Method::Mdcp => "MDCP",
            Method::Pmdcp => "PMDCP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mf" => Ok(Method::Mf),
            "pmf" => Ok(Method::Pmf),
            "mdcp" => Ok(Method::Mdcp),
            "pmdcp" => Ok(Method::Pmdcp),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// A closed one-step-ahead interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: Alpha,
    pub method: Method,
}

impl PredictionInterval {
    pub fn new(lower: f64, upper: f64, alpha: Alpha, method: Method) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower > upper {
            return Err(Error::DegenerateData(format!(
                "invalid interval [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            alpha,
            method,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }
}
