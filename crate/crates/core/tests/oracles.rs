//! Equivalence checks against independent brute-force reimplementations.

use mdcp::conformal::interval_from_trace;
use mdcp::{
    build_trial_grid, conformal_interval, embed, estimate_loo, last_predictor, mdcp_pvalue,
    select_bandwidths, simulate, Alpha, BandwidthMode, Bandwidths, ConditionalCdfModel, DgpModel,
    DgpSpec, Innovation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{pairs_of, random_instance, Oracle};

#[test]
fn series_kernel_matches_frozen_value() {
    assert!((Oracle::new().k(1.0) - 0.857_616_386_005_453).abs() < 1e-15);
}

#[test]
fn loo_equals_estimate_on_deleted_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    while checked < 1000 {
        let (xs, ys, bw) = random_instance(&mut rng, 25);
        if xs.len() < 3 {
            continue;
        }
        let pairs = pairs_of(&xs, &ys);
        let t = rng.random_range(0..xs.len());
        let x: Vec<f64> = (0..xs[0].len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let y = rng.random_range(-3.0..3.0);
        let (mut dx, mut dy) = (xs.clone(), ys.clone());
        dx.remove(t);
        dy.remove(t);
        let deleted = ConditionalCdfModel::new(&pairs_of(&dx, &dy), bw)
            .estimate(&x, y)
            .unwrap();
        let loo = estimate_loo(&pairs, bw, t, &x, y).unwrap();
        assert!(
            (loo - deleted).abs() <= 1e-12,
            "instance {checked}: {loo} vs {deleted}"
        );
        checked += 1;
    }
}

#[test]
fn estimates_match_direct_double_sum() {
    let oracle = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..300 {
        let (xs, ys, bw) = random_instance(&mut rng, 20);
        let model = ConditionalCdfModel::new(&pairs_of(&xs, &ys), bw);
        let x: Vec<f64> = (0..xs[0].len())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let y = rng.random_range(-3.0..3.0);
        let got = model.estimate(&x, y).unwrap();
        let want = oracle.estimate(&xs, &ys, bw, None, &x, y);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn pvalue_matches_rank_and_count_oracle() {
    let oracle = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for i in 0..200 {
        let (xs, ys, bw) = random_instance(&mut rng, 12);
        let pairs = pairs_of(&xs, &ys);
        let x_n: Vec<f64> = (0..xs[0].len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let y = rng.random_range(-3.0..3.0);
        let predictive = i % 2 == 1;
        let got = mdcp_pvalue(&pairs, bw, &x_n, y, predictive).unwrap();
        let want = oracle.pvalue(&xs, &ys, bw, &x_n, y, predictive);
        assert!((got - want).abs() <= 1e-12, "instance {i}: {got} vs {want}");
    }
}

#[test]
fn four_pair_pvalue_oracle() {
    let oracle = Oracle::new();
    let xs = vec![vec![0.31], vec![-0.72], vec![1.05], vec![0.12]];
    let ys = vec![-0.72, 1.05, 0.12, 0.58];
    let bw = Bandwidths::new(0.7, 0.45).unwrap();
    let pairs = pairs_of(&xs, &ys);
    for y in [-1.5, -0.3, 0.2, 0.6, 1.4] {
        for predictive in [false, true] {
            let got = mdcp_pvalue(&pairs, bw, &[0.58], y, predictive).unwrap();
            assert_eq!(got, oracle.pvalue(&xs, &ys, bw, &[0.58], y, predictive));
        }
    }
}

#[test]
fn augmented_estimate_equals_union_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..500 {
        let (xs, ys, bw) = random_instance(&mut rng, 20);
        let x_a: Vec<f64> = (0..xs[0].len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let y_a = rng.random_range(-2.0..2.0);
        let augmented =
            ConditionalCdfModel::with_augment(&pairs_of(&xs, &ys), bw, &x_a, y_a).unwrap();
        let (mut ux, mut uy) = (xs.clone(), ys.clone());
        ux.push(x_a);
        uy.push(y_a);
        let union = ConditionalCdfModel::new(&pairs_of(&ux, &uy), bw);
        let x: Vec<f64> = (0..xs[0].len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let y = rng.random_range(-3.0..3.0);
        assert_eq!(
            augmented.estimate(&x, y).unwrap(),
            union.estimate(&x, y).unwrap()
        );
    }
}

#[test]
fn conformal_interval_replays_from_independent_trace() {
    let series = simulate(&DgpSpec::new(DgpModel::Sine, Innovation::Normal, 100, 7)).unwrap();
    let pairs = embed(&series, 1).unwrap();
    let x_n = last_predictor(&series, 1).unwrap();
    let bw = select_bandwidths(&pairs, BandwidthMode::Cv).unwrap();
    let grid = build_trial_grid(&series, 200).unwrap();
    let alpha = Alpha::new(0.1).unwrap();
    let (pi, trace) = conformal_interval(&pairs, bw, &x_n, &grid, alpha, false).unwrap();

    let accepted: Vec<f64> = grid
        .points()
        .iter()
        .copied()
        .filter(|&y| mdcp_pvalue(&pairs, bw, &x_n, y, false).unwrap() > 0.1)
        .collect();
    assert_eq!(pi.lower, accepted[0]);
    assert_eq!(pi.upper, *accepted.last().unwrap());
    assert_eq!(interval_from_trace(&trace, alpha, false).unwrap(), pi);
}

#[test]
fn generic_grid_reaches_pvalue_one() {
    // A grid spanning the data always contains a candidate near the conditional
    // median, so the accepted set at alpha = 0.999 is not empty.
    let oracle = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let ys: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
    let series = mdcp::TimeSeries::new(ys).unwrap();
    let pairs = embed(&series, 1).unwrap();
    let x_n = last_predictor(&series, 1).unwrap();
    let bw = Bandwidths::new(0.8, 0.5).unwrap();
    let grid = build_trial_grid(&series, 200).unwrap();
    let xs: Vec<Vec<f64>> = (0..pairs.len())
        .map(|t| pairs.predictor(t).to_vec())
        .collect();
    let max_p = grid
        .points()
        .iter()
        .map(|&y| oracle.pvalue(&xs, pairs.responses(), bw, &x_n, y, false))
        .fold(0.0, f64::max);
    assert_eq!(max_p, 1.0);
    assert!(conformal_interval(&pairs, bw, &x_n, &grid, Alpha::new(0.999).unwrap(), false).is_ok());
}
