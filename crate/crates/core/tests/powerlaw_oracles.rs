mod common;

use common::{exponential_counts, power_law_sample};
use semstab::powerlaw::{compare_distributions, fit_power_law, Alternative, PowerLawFit};

/// KS distance of the tail `x >= xmin` against a power law with given parameters,
/// checked at every integer in the tail range.
fn brute_ks(sample: &[u64], alpha: f64, xmin: u64) -> f64 {
    let tail: Vec<u64> = sample.iter().copied().filter(|&x| x >= xmin).collect();
    let fit = PowerLawFit { alpha, xmin, ks_distance: 0.0, n_tail: tail.len() };
    let max = *tail.iter().max().unwrap();
    (xmin..=max)
        .map(|x| {
            let emp = tail.iter().filter(|&&v| v <= x).count() as f64 / tail.len() as f64;
            (emp - fit.cdf(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn mle_alpha(sample: &[u64], xmin: u64) -> f64 {
    let shift = xmin as f64 - 0.5;
    let tail: Vec<f64> = sample.iter().filter(|&&x| x >= xmin).map(|&x| x as f64).collect();
    1.0 + tail.len() as f64 / tail.iter().map(|x| (x / shift).ln()).sum::<f64>()
}

#[test]
fn recovers_exponent_across_seeds() {
    for seed in [1, 7, 42] {
        let sample = power_law_sample(2.5, 5, 10_000, seed);
        let fit = fit_power_law(&sample).unwrap();
        assert!((2.35..=2.65).contains(&fit.alpha), "seed {seed}: {fit:?}");
        // The chosen xmin fits at least as well as the true one.
        let at_truth = brute_ks(&sample, mle_alpha(&sample, 5), 5);
        assert!(fit.ks_distance <= at_truth + 0.01, "seed {seed}: {} vs {at_truth}", fit.ks_distance);
        assert!((fit.ks_distance - brute_ks(&sample, fit.alpha, fit.xmin)).abs() < 1e-12);
    }
}

#[test]
fn power_law_beats_exponential() {
    let sample = power_law_sample(2.2, 3, 5_000, 11);
    let fit = fit_power_law(&sample).unwrap();
    let cmp = compare_distributions(&sample, &fit).unwrap();
    let exp = cmp.get(Alternative::Exponential).as_ref().unwrap();
    assert!(exp.ratio > 0.0 && exp.p_value < 0.1, "{exp:?}");
}

#[test]
fn exponential_data_prefers_exponential() {
    let sample = exponential_counts(0.5, 5_000, 3);
    let fit = fit_power_law(&sample).unwrap();
    let cmp = compare_distributions(&sample, &fit).unwrap();
    let exp = cmp.get(Alternative::Exponential).as_ref().unwrap();
    assert!(exp.ratio < 0.0, "{exp:?}");
}

#[test]
fn lognormal_is_hard_to_reject() {
    // The lognormal nests power-law-like tails, so the sign is not significant.
    let sample = power_law_sample(2.5, 5, 10_000, 2014);
    let fit = fit_power_law(&sample).unwrap();
    let cmp = compare_distributions(&sample, &fit).unwrap();
    let ln = cmp.get(Alternative::Lognormal).as_ref().unwrap();
    assert!(ln.p_value > 0.1, "{ln:?}");
    assert!(cmp.get(Alternative::StretchedExponential).is_ok());
}
