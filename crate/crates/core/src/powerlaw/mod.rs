//! Heavy-tail fitting of tag-frequency samples.
//!
//! The power-law exponent is the continuous-approximation MLE for discrete data,
//! `alpha = 1 + n / sum ln(x / (xmin - 1/2))`, and `xmin` is the observed value
//! whose fit has the smallest Kolmogorov–Smirnov distance to the tail.
//! [`compare_distributions`] then pits the fitted tail against exponential,
//! lognormal and stretched-exponential alternatives with Vuong's test.

mod compare;
mod simplex;

pub use compare::{compare_distributions, Alternative, FitFailure, LikelihoodRatioTest, ModelComparison};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: u64,
    pub ks_distance: f64,
    pub n_tail: usize,
}

impl PowerLawFit {
    /// Lower bound of the continuous approximation.
    pub(crate) fn shifted_xmin(&self) -> f64 {
        self.xmin as f64 - 0.5
    }

    /// `P(X <= x)` of the fitted discrete tail at an integer `x >= xmin`.
    pub fn cdf(&self, x: u64) -> f64 {
        if x < self.xmin {
            return 0.0;
        }
        1.0 - ((x as f64 + 0.5) / self.shifted_xmin()).powf(1.0 - self.alpha)
    }
}

/// Distinct values ascending with their multiplicities.
fn histogram(sorted: &[u64]) -> Vec<(u64, usize)> {
    let mut out: Vec<(u64, usize)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

fn ks_distance(tail: &[(u64, usize)], fit: &PowerLawFit) -> f64 {
    let n = fit.n_tail as f64;
    let mut seen = 0usize;
    let mut d: f64 = 0.0;
    for (i, &(x, count)) in tail.iter().enumerate() {
        seen += count;
        let empirical = seen as f64 / n;
        d = d.max((empirical - fit.cdf(x)).abs());
        // The model keeps rising across a gap while the empirical CDF is flat.
        if let Some(&(next, _)) = tail.get(i + 1) {
            if next > x + 1 {
                d = d.max((empirical - fit.cdf(next - 1)).abs());
            }
        }
    }
    d
}

/// Fits a discrete power-law tail, choosing `xmin` by minimum KS distance.
///
/// Candidates are the distinct observed values that leave at least two
/// observations in the tail; ties in distance go to the smaller `xmin`.
pub fn fit_power_law(sample: &[u64]) -> Result<PowerLawFit> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("power-law sample is empty"));
    }
    if sample.contains(&0) {
        return Err(Error::Parameter {
            name: "sample",
            reason: "values must be at least 1".into(),
        });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable();
    let hist = histogram(&sorted);
    if hist.len() < 2 {
        return Err(Error::Degenerate(format!(
            "sample has a single distinct value {}",
            hist[0].0
        )));
    }

    // suffix[i] = (count, sum of ln x) over hist[i..]
    let mut suffix = vec![(0usize, 0.0f64); hist.len() + 1];
    for i in (0..hist.len()).rev() {
        let (x, c) = hist[i];
        suffix[i] = (suffix[i + 1].0 + c, suffix[i + 1].1 + c as f64 * (x as f64).ln());
    }

    let mut best: Option<PowerLawFit> = None;
    for (i, &(xmin, _)) in hist.iter().enumerate() {
        let (n_tail, log_sum) = suffix[i];
        if n_tail < 2 {
            break;
        }
        let shifted = xmin as f64 - 0.5;
        let alpha = 1.0 + n_tail as f64 / (log_sum - n_tail as f64 * shifted.ln());
        let mut fit = PowerLawFit {
            alpha,
            xmin,
            ks_distance: 0.0,
            n_tail,
        };
        fit.ks_distance = ks_distance(&hist[i..], &fit);
        if best.is_none_or(|b| fit.ks_distance < b.ks_distance) {
            best = Some(fit);
        }
    }
    // The smallest value always leaves the whole sample (>= 2 points) in the tail.
    Ok(best.expect("at least one xmin candidate"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub value: u64,
    pub ccdf: f64,
}

/// `P(X >= v)` at every distinct value `v`, ascending.
pub fn ccdf(sample: &[u64]) -> Result<Vec<CcdfPoint>> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("ccdf of an empty sample"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut remaining = sorted.len();
    Ok(histogram(&sorted)
        .into_iter()
        .map(|(value, count)| {
            let point = CcdfPoint {
                value,
                ccdf: remaining as f64 / n,
            };
            remaining -= count;
            point
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ccdf_small() {
        let c = ccdf(&[1, 1, 2]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].value, c[0].ccdf), (1, 1.0));
        assert_eq!(c[1].value, 2);
        assert_abs_diff_eq!(c[1].ccdf, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(ccdf(&[5]).unwrap(), vec![CcdfPoint { value: 5, ccdf: 1.0 }]);
        assert!(matches!(ccdf(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn ccdf_last_point_is_max_multiplicity() {
        let c = ccdf(&[3, 9, 1, 9, 4, 9, 2]).unwrap();
        assert_abs_diff_eq!(c.last().unwrap().ccdf, 3.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn single_distinct_value_is_degenerate() {
        assert!(matches!(fit_power_law(&[4, 4, 4]), Err(Error::Degenerate(_))));
        assert!(fit_power_law(&[0, 1]).is_err());
        assert!(fit_power_law(&[]).is_err());
    }

    #[test]
    fn lone_maximum_is_not_a_candidate() {
        let mut sample = vec![1u64; 20];
        sample.push(2);
        let fit = fit_power_law(&sample).unwrap();
        assert_eq!(fit.xmin, 1);
        assert_eq!(fit.n_tail, 21);
        let expected = 1.0 + 21.0 / (20.0 * 2f64.ln() + 4f64.ln());
        assert_abs_diff_eq!(fit.alpha, expected, epsilon = 1e-12);
    }

    #[test]
    fn ks_distance_is_brute_force_maximum() {
        let sample = [1, 1, 1, 2, 2, 3, 5, 8, 13, 13, 40];
        let fit = fit_power_law(&sample).unwrap();
        let tail: Vec<u64> = sample.iter().copied().filter(|&x| x >= fit.xmin).collect();
        let n = tail.len() as f64;
        // Compare both CDFs at every integer in the tail's range.
        let brute = (fit.xmin..=*tail.iter().max().unwrap())
            .map(|x| {
                let emp = tail.iter().filter(|&&v| v <= x).count() as f64 / n;
                let model = 1.0 - ((x as f64 + 0.5) / (fit.xmin as f64 - 0.5)).powf(1.0 - fit.alpha);
                (emp - model).abs()
            })
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(fit.ks_distance, brute, epsilon = 1e-12);
    }

    #[test]
    fn order_does_not_matter() {
        let a = [7, 1, 3, 3, 2, 1, 1, 12, 2, 5];
        let mut b = a;
        b.reverse();
        assert_eq!(fit_power_law(&a).unwrap(), fit_power_law(&b).unwrap());
    }
}
