mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tsls_core::{
    grad_log_posterior, log_posterior, log_prior, phi_from_params, simulate_survey, BasisConfig,
    HeapSet, LogDensity, ModelParams, NonCentered, Posterior, ReportedDataset, ReportingBehavior,
    SplineBasisF64, TrueTbsF64,
};

fn basis() -> SplineBasisF64 {
    SplineBasisF64::build(&BasisConfig::default()).unwrap()
}

fn random_params(r: &mut impl Rng, k: usize, scale: f64) -> ModelParams<f64> {
    let delta = (0..k).map(|_| scale * standard_normal(r)).collect();
    ModelParams::new(delta, r.random_range(-2.0..1.5))
}

#[test]
fn phi_is_a_monotone_simplex_for_random_parameters() {
    let b = basis();
    let mut r = rng(11);
    for i in 0..1000 {
        // Include extreme draws that push partial sums past the exp range.
        let scale = [0.1, 1.0, 5.0, 60.0][i % 4];
        let params = random_params(&mut r, b.num_functions(), scale);
        let phi = phi_from_params(&params, &b).unwrap();
        let p = phi.probabilities();
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn log_prior_matches_density_sum() {
    let mut r = rng(12);
    for _ in 0..200 {
        let params = random_params(&mut r, 33, 2.0);
        let expected = common::log_prior(&params.delta, params.log_sigma);
        assert!((log_prior(&params) - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }
}

#[test]
fn log_posterior_matches_enumeration() {
    let b = basis();
    let truth = TrueTbsF64::geometric(0.05).unwrap();
    let mut r = rng(13);
    for seed in 0..10 {
        let data = simulate_survey(&truth, &ReportingBehavior::default(), 50, seed).unwrap();
        let params = random_params(&mut r, b.num_functions(), 0.7);
        let phi = phi_from_params(&params, &b).unwrap();
        let brute: f64 = data
            .records()
            .iter()
            .map(|rec| enumerated_prob(phi.probabilities(), rec, data.heap()).ln())
            .sum();
        let expected = common::log_prior(&params.delta, params.log_sigma) + brute;
        let got = log_posterior(&params, &data, &b).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }
}

#[test]
fn record_order_does_not_matter() {
    let b = basis();
    let mut r = rng(14);
    let records = random_records(&mut r, 300);
    let params = random_params(&mut r, b.num_functions(), 0.5);
    let forward = ReportedDataset::new(records.clone(), HeapSet::default()).unwrap();
    let mut shuffled = records;
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, r.random_range(0..=i));
    }
    let shuffled = ReportedDataset::new(shuffled, HeapSet::default()).unwrap();
    assert_eq!(
        log_posterior(&params, &forward, &b).unwrap(),
        log_posterior(&params, &shuffled, &b).unwrap()
    );
    assert_eq!(
        grad_log_posterior(&params, &forward, &b).unwrap(),
        grad_log_posterior(&params, &shuffled, &b).unwrap()
    );
}

#[test]
fn duplicated_data_doubles_the_likelihood_gradient() {
    let b = basis();
    let mut r = rng(15);
    let records = random_records(&mut r, 120);
    let params = random_params(&mut r, b.num_functions(), 0.5);
    let once = ReportedDataset::new(records.clone(), HeapSet::default()).unwrap();
    let twice =
        ReportedDataset::new([records.clone(), records].concat(), HeapSet::default()).unwrap();
    let empty = ReportedDataset::empty(HeapSet::default());
    let g0 = grad_log_posterior(&params, &empty, &b).unwrap();
    let g1 = grad_log_posterior(&params, &once, &b).unwrap();
    let g2 = grad_log_posterior(&params, &twice, &b).unwrap();
    for i in 0..g0.len() {
        let (l1, l2) = (g1[i] - g0[i], g2[i] - g0[i]);
        assert!((l2 - 2.0 * l1).abs() < 1e-9 * (1.0 + l1.abs()));
    }
}

#[test]
fn prior_gradient_matches_finite_differences() {
    let b = basis();
    let empty = ReportedDataset::empty(HeapSet::default());
    let params = ModelParams::zeros(b.num_functions());
    let g = grad_log_posterior(&params, &empty, &b).unwrap();
    let theta = params.to_vec();
    let f = |x: &[f64]| log_posterior(&ModelParams::from_slice(x).unwrap(), &empty, &b).unwrap();
    for i in 0..theta.len() {
        let fd = central_difference(f, &theta, i, 1e-5);
        assert!((g[i] - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{i}: {} vs {fd}", g[i]);
    }
    assert!(g[..b.num_functions()].iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_finite_differences(seed in 0u64..1_000_000) {
        let b = basis();
        let mut r = rng(seed);
        let data = ReportedDataset::new(random_records(&mut r, 80), HeapSet::default()).unwrap();
        let params = random_params(&mut r, b.num_functions(), 0.5);
        let theta = params.to_vec();
        let g = grad_log_posterior(&params, &data, &b).unwrap();
        let f = |x: &[f64]| log_posterior(&ModelParams::from_slice(x).unwrap(), &data, &b).unwrap();
        for i in 0..theta.len() {
            let fd = central_difference(f, &theta, i, 1e-5);
            prop_assert!((g[i] - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{}: {} vs {}", i, g[i], fd);
        }
    }
}

#[test]
fn non_centered_gradient_matches_differences() {
    let basis = SplineBasisF64::build(&BasisConfig::new(8, 3)).unwrap();
    let mut r = rng(91);
    let data = ReportedDataset::new(random_records(&mut r, 200), HeapSet::default()).unwrap();
    let target = NonCentered(Posterior::new(&data, &basis).unwrap());
    let dim = LogDensity::dim(&target);
    let mut scratch = vec![0.0; dim];
    let eval = |x: &[f64]| target.log_density_and_gradient(x, &mut vec![0.0; dim]);
    for _ in 0..10 {
        let x: Vec<f64> = (0..dim).map(|_| 1.5 * standard_normal(&mut r)).collect();
        target.log_density_and_gradient(&x, &mut scratch);
        for i in 0..dim {
            let h = 1e-4;
            let fd = (8.0 * central_difference(eval, &x, i, h)
                - central_difference(eval, &x, i, 2.0 * h))
                / 7.0;
            assert!(
                (scratch[i] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                "coordinate {i}: {} vs {fd}",
                scratch[i]
            );
        }
        // The draw it reports is the centered point with the same density up to the Jacobian.
        let theta = target.output(&x);
        let centered = Posterior::new(&data, &basis).unwrap();
        let k = dim - 1;
        let lp_c = centered.log_density_and_gradient(&theta, &mut vec![0.0; dim]);
        assert!((eval(&x) - lp_c - k as f64 * x[k]).abs() < 1e-9 * lp_c.abs().max(1.0));
    }
}
