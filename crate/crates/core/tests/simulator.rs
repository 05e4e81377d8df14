mod common;

use common::*;
use tsls_core::simulator::{simulate_records, TrueTbs};
use tsls_core::{day_interval, sample_tsls_exact, ReportingBehavior};

fn truths() -> Vec<(&'static str, TrueTbs<f64>)> {
    vec![
        ("geometric", "geometric:p=0.1".parse().unwrap()),
        ("slow", "geometric:p=0.01".parse().unwrap()),
        ("point", "point:g=20".parse().unwrap()),
        ("bimodal", "bimodal:p=0.2,g=90,w=0.3".parse().unwrap()),
        ("uniform", TrueTbs::uniform()),
    ]
}

#[test]
fn exact_draws_follow_the_current_duration_pmf() {
    for (name, truth) in truths() {
        for seed in [1, 2, 3] {
            let ys = sample_tsls_exact(&truth, 40_000, seed).unwrap();
            let expected = current_duration_pmf(truth.probabilities());
            let tv = total_variation(&empirical_pmf(&ys, DAYS), &expected);
            // Expected TV of an empirical pmf is at most sqrt(k / n) / 2 for k occupied cells.
            let occupied = expected.iter().filter(|&&p| p > 1e-6).count() as f64;
            let bound = 0.5 * (occupied / 40_000.0).sqrt() * 1.5;
            assert!(tv < bound.max(0.01), "{name} seed {seed}: {tv} vs {bound}");
        }
    }
}

#[test]
fn reports_always_cover_the_true_day() {
    let behavior = ReportingBehavior::default();
    for (name, truth) in truths() {
        for seed in 0..4 {
            for (y, report) in simulate_records(&truth, &behavior, 3000, seed).unwrap() {
                let iv = day_interval(&report, behavior.heap()).unwrap();
                assert!(iv.contains(y), "{name}: {report} does not cover {y}");
            }
        }
    }
}

#[test]
fn same_seed_same_survey() {
    let truth: TrueTbs<f64> = "geometric:p=0.05".parse().unwrap();
    let behavior = ReportingBehavior::default();
    let a = simulate_records(&truth, &behavior, 2000, 9).unwrap();
    let b = simulate_records(&truth, &behavior, 2000, 9).unwrap();
    let c = simulate_records(&truth, &behavior, 2000, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
