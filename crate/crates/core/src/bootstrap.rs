//! Model-free (MF) and predictive model-free (PMF) bootstrap prediction intervals.
//!
//! Observed pairs are mapped to ranks through the estimated conditional CDF,
//! the ranks are resampled, and bootstrap paths are regenerated by pushing the
//! resampled ranks back through the inverse CDF. Each replicate records the
//! root `Y*_{n+1} - Yhat*_{n+1}`; the interval is the point predictor shifted
//! by the equal-tailed root quantiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cdf::{transform_ranks, ConditionalCdfModel, LocalCdf};
use crate::error::{Error, Result};
use crate::kernels::Bandwidths;
use crate::series::{
    check_dim, embed, Alpha, EmbeddedPairs, Method, PredictionInterval, TimeSeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B`.
    pub replicates: usize,
    /// Warm-up length `M` of each generated path.
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 250,
            warmup: 100,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub point_predictor: f64,
    /// Bootstrap roots in replicate order.
    pub roots: Vec<f64>,
    pub interval: PredictionInterval,
}

/// The `ceil(B a)`-th order statistic (1-indexed) of `values`.
pub fn empirical_quantile(values: &[f64], a: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::DegenerateData("quantile of an empty sample".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidProbability(a));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, a))
}

fn quantile_sorted(sorted: &[f64], a: f64) -> f64 {
    let b = sorted.len();
    // Guard against products like 20 * 0.05 landing a hair above an integer.
    let rank = ((b as f64) * a - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(b) - 1]
}

fn mean_inverse(local: &LocalCdf<'_>, ranks: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &v in ranks {
        total += local.quantile(v)?;
    }
    Ok(total / ranks.len() as f64)
}

/// `Yhat_{n+1}`: the mean of `F^{-1}(V_t | x_n)` over the supplied ranks.
pub fn mf_point_predictor(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    x_n: &[f64],
    ranks: &[f64],
) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::DegenerateData("no ranks supplied".into()));
    }
    let model = ConditionalCdfModel::new(pairs, bw);
    mean_inverse(&model.at(x_n)?, ranks)
}

/// MF (`predictive = false`) or PMF (`predictive = true`) bootstrap interval for `Y_{n+1}`.
pub fn mf_interval(
    pairs: &EmbeddedPairs,
    bw: Bandwidths,
    x_n: &[f64],
    alpha: Alpha,
    cfg: BootstrapConfig,
    predictive: bool,
) -> Result<BootstrapResult> {
    let p = pairs.order();
    check_dim(p, x_n)?;
    if cfg.replicates == 0 {
        return Err(Error::InvalidConfig(
            "bootstrap replicates must be positive".into(),
        ));
    }
    if cfg.warmup < p {
        return Err(Error::WarmupTooShort {
            warmup: cfg.warmup,
            p,
        });
    }

    let ranks = transform_ranks(pairs, bw, predictive)?;
    let model = ConditionalCdfModel::new(pairs, bw);
    let at_last = model.at(x_n)?;
    let point_predictor = mean_inverse(&at_last, &ranks)?;

    let replicate = Replicate {
        pairs,
        bw,
        x_n,
        ranks: &ranks,
        model: &model,
        at_last: &at_last,
        warmup: cfg.warmup,
    };
    let roots: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            replicate.root(&mut rng)
        })
        .collect::<Result<_>>()?;

    let mut sorted = roots.clone();
    sorted.sort_by(f64::total_cmp);
    let a = alpha.value();
    let lower = point_predictor + quantile_sorted(&sorted, a / 2.0);
    let upper = point_predictor + quantile_sorted(&sorted, 1.0 - a / 2.0);
    let method = if predictive { Method::Pmf } else { Method::Mf };
    Ok(BootstrapResult {
        point_predictor,
        roots,
        interval: PredictionInterval::new(lower, upper, alpha, method)?,
    })
}

struct Replicate<'a> {
    pairs: &'a EmbeddedPairs,
    bw: Bandwidths,
    x_n: &'a [f64],
    ranks: &'a [f64],
    model: &'a ConditionalCdfModel,
    at_last: &'a LocalCdf<'a>,
    warmup: usize,
}

impl Replicate<'_> {
    fn root(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        let p = self.pairs.order();
        let n_pairs = self.pairs.len();
        let n = n_pairs + p;
        let m = self.warmup;

        // Resampled ranks V*_t for t = -M..=n+1, stored at offset t + M.
        let vstar: Vec<f64> = (0..m + n + 2)
            .map(|_| self.ranks[rng.random_range(0..n_pairs)])
            .collect();

        // Initial block: any p consecutive observations. The n - p + 1 such blocks
        // are exactly the observed predictor vectors plus X_n.
        let block = rng.random_range(0..=n_pairs);
        let mut state: Vec<f64> = if block == n_pairs {
            self.x_n.to_vec()
        } else {
            self.pairs.predictor(block).to_vec()
        };

        // Generate Y*_t for t = -M+p..=n; keep the last n values, Y*_1..Y*_n.
        let mut path = Vec::with_capacity(n);
        for t in (p as i64 - m as i64)..=(n as i64) {
            let v = vstar[(t + m as i64) as usize];
            let y = self.model.at(&state)?.quantile(v)?;
            state.rotate_right(1);
            state[0] = y;
            if t >= 1 {
                path.push(y);
            }
        }
        let future = self.at_last.quantile(vstar[m + n + 1])?;

        let boot_pairs = embed(&TimeSeries::new(path)?, p)?;
        let boot_model = ConditionalCdfModel::new(&boot_pairs, self.bw);
        let boot_at_last = boot_model.at(self.x_n)?;
        let boot_predictor = mean_inverse(&boot_at_last, &vstar[m + p + 1..=m + n])?;
        Ok(future - boot_predictor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeSeries;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample_pairs() -> EmbeddedPairs {
        let v = vec![
            0.3, -1.2, 0.8, 1.5, -0.4, 0.9, -0.7, 0.2, 1.1, -0.1, 0.6, -0.9, 0.05, 0.45, -0.35,
            1.3, -1.05, 0.15, 0.7, -0.55,
        ];
        embed(&TimeSeries::new(v).unwrap(), 1).unwrap()
    }

    #[test]
    fn quantile_index_arithmetic() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.05).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&v, 0.975).unwrap(), 20.0);
        assert_eq!(empirical_quantile(&v, 0.5).unwrap(), 10.0);
        assert_eq!(empirical_quantile(&[7.0], 0.3).unwrap(), 7.0);
        assert!(empirical_quantile(&[], 0.3).is_err());
        assert!(empirical_quantile(&v, 1.0).is_err());
    }

    #[test]
    fn point_predictor_examples() {
        let zeros =
            EmbeddedPairs::new(1, vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0; 3]).unwrap();
        let bw = Bandwidths::new(0.5, 0.3).unwrap();
        let y = mf_point_predictor(&zeros, bw, &[0.5], &[0.5, 0.5, 0.5]).unwrap();
        assert!(y.abs() < 1e-8);

        let pairs = sample_pairs();
        let model = ConditionalCdfModel::new(&pairs, bw);
        let single = model.invert(&[0.2], 0.3).unwrap();
        assert_relative_eq!(
            mf_point_predictor(&pairs, bw, &[0.2], &[0.3; 4]).unwrap(),
            single,
            epsilon = 1e-14
        );
        assert!(mf_point_predictor(&pairs, bw, &[0.2], &[1.5]).is_err());
    }

    #[test]
    fn point_predictor_matches_per_term_inversions() {
        let pairs = sample_pairs();
        let bw = Bandwidths::new(0.6, 0.35).unwrap();
        let ranks = [0.11, 0.52, 0.93, 0.37, 0.68];
        let model = ConditionalCdfModel::new(&pairs, bw);
        let direct: f64 = ranks
            .iter()
            .map(|&v| model.invert(&[-0.55], v).unwrap())
            .sum::<f64>()
            / 5.0;
        assert_relative_eq!(
            mf_point_predictor(&pairs, bw, &[-0.55], &ranks).unwrap(),
            direct,
            epsilon = 1e-12
        );
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let pairs = sample_pairs();
        let bw = Bandwidths::new(0.6, 0.35).unwrap();
        let cfg = BootstrapConfig {
            replicates: 40,
            warmup: 20,
            seed: 9,
        };
        let alpha = Alpha::new(0.1).unwrap();
        for predictive in [false, true] {
            let a = mf_interval(&pairs, bw, &[-0.55], alpha, cfg, predictive).unwrap();
            let b = mf_interval(&pairs, bw, &[-0.55], alpha, cfg, predictive).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.roots.len(), 40);
            let median = empirical_quantile(&a.roots, 0.5).unwrap();
            assert!(a.interval.lower <= a.point_predictor + median);
            assert!(a.point_predictor + median <= a.interval.upper);
        }
        let other = mf_interval(
            &pairs,
            bw,
            &[-0.55],
            alpha,
            BootstrapConfig { seed: 10, ..cfg },
            false,
        )
        .unwrap();
        assert_ne!(
            other.roots,
            mf_interval(&pairs, bw, &[-0.55], alpha, cfg, false)
                .unwrap()
                .roots
        );
    }

    #[test]
    fn warmup_shorter_than_order_is_rejected() {
        let v: Vec<f64> = (0..15).map(|i| (i as f64 * 0.7).sin()).collect();
        let pairs = embed(&TimeSeries::new(v).unwrap(), 3).unwrap();
        let bw = Bandwidths::new(0.6, 0.35).unwrap();
        let cfg = BootstrapConfig {
            replicates: 5,
            warmup: 2,
            seed: 1,
        };
        assert_eq!(
            mf_interval(
                &pairs,
                bw,
                &[0.1, 0.2, 0.3],
                Alpha::new(0.1).unwrap(),
                cfg,
                false
            ),
            Err(Error::WarmupTooShort { warmup: 2, p: 3 })
        );
    }

    #[test]
    fn degenerate_roots_give_zero_width() {
        // A constant series regenerates itself exactly, so every root is zero.
        let pairs = embed(&TimeSeries::new(vec![0.0; 12]).unwrap(), 1).unwrap();
        let bw = Bandwidths::new(0.5, 0.2).unwrap();
        let cfg = BootstrapConfig {
            replicates: 8,
            warmup: 5,
            seed: 3,
        };
        let r = mf_interval(&pairs, bw, &[0.0], Alpha::new(0.1).unwrap(), cfg, false).unwrap();
        let first = r.roots[0];
        assert!(r.roots.iter().all(|&x| x == first));
        assert_eq!(r.interval.lower, r.point_predictor + first);
        assert_eq!(r.interval.upper, r.point_predictor + first);
        assert_eq!(r.interval.length(), 0.0);
    }

    proptest! {
        #[test]
        fn quantiles_are_monotone(
            v in prop::collection::vec(-10.0f64..10.0, 1..50),
            a in 0.001f64..0.999,
            b in 0.001f64..0.999,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(empirical_quantile(&v, lo).unwrap() <= empirical_quantile(&v, hi).unwrap());
        }
    }
}
