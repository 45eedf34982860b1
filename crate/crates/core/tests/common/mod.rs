//! Independent brute-force reimplementations shared by the integration tests.
#![allow(dead_code)]

use mdcp::{Bandwidths, EmbeddedPairs};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `Phi(z) = 1/2 + phi(z) * sum_k z^(2k+1) / (2k+1)!!`, accurate to rounding on [-2, 2].
pub fn phi_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut k = 1.0;
    while term.abs() > 1e-18 {
        term *= z * z / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    0.5 + (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * sum
}

pub struct Oracle;

impl Oracle {
    pub fn new() -> Self {
        Oracle
    }

    pub fn k(&self, z: f64) -> f64 {
        if z <= -2.0 {
            return 0.0;
        }
        if z >= 2.0 {
            return 1.0;
        }
        let lo = phi_series(-2.0);
        (phi_series(z) - lo) / (phi_series(2.0) - lo)
    }

    pub fn w(x_i: &[f64], x: &[f64], h: f64) -> f64 {
        x_i.iter()
            .zip(x)
            .map(|(a, b)| {
                let z = (a - b) / h;
                (-0.5 * z * z).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
            })
            .product()
    }

    /// Direct double sum over `(xs, ys)` excluding `skip`.
    pub fn estimate(
        &self,
        xs: &[Vec<f64>],
        ys: &[f64],
        bw: Bandwidths,
        skip: Option<usize>,
        x: &[f64],
        y: f64,
    ) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..xs.len() {
            if Some(i) == skip {
                continue;
            }
            let w = Self::w(&xs[i], x, bw.h);
            num += w * self.k((y - ys[i]) / bw.h0);
            den += w;
        }
        num / den
    }

    pub fn pvalue(
        &self,
        xs: &[Vec<f64>],
        ys: &[f64],
        bw: Bandwidths,
        x_n: &[f64],
        y: f64,
        predictive: bool,
    ) -> f64 {
        let mut xs = xs.to_vec();
        let mut ys = ys.to_vec();
        xs.push(x_n.to_vec());
        ys.push(y);
        let n = xs.len();
        let scores: Vec<f64> = (0..n)
            .map(|t| {
                let skip = if predictive { Some(t) } else { None };
                (self.estimate(&xs, &ys, bw, skip, &xs[t], ys[t]) - 0.5).abs()
            })
            .collect();
        scores.iter().filter(|&&s| s >= scores[n - 1]).count() as f64 / n as f64
    }
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_pairs: usize,
) -> (Vec<Vec<f64>>, Vec<f64>, Bandwidths) {
    let p = rng.random_range(1..=3);
    let n = rng.random_range(2..=max_pairs);
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let bw = Bandwidths::new(rng.random_range(0.3..1.5), rng.random_range(0.2..1.0)).unwrap();
    (xs, ys, bw)
}

pub fn pairs_of(xs: &[Vec<f64>], ys: &[f64]) -> EmbeddedPairs {
    EmbeddedPairs::new(xs[0].len(), xs.to_vec(), ys.to_vec()).unwrap()
}
