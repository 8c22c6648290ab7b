use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::Serialize;
use statrs::function::erf::erfc;

use super::simplex::{self, Options};
use super::PowerLawFit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Exponential,
    Lognormal,
    StretchedExponential,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Exponential => "exponential",
            Alternative::Lognormal => "lognormal",
            Alternative::StretchedExponential => "stretched_exponential",
        })
    }
}

/// Vuong's likelihood-ratio test of the power law against one alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LikelihoodRatioTest {
    /// Summed log-likelihood of the power law minus the alternative; positive favors the power law.
    pub ratio: f64,
    /// `ratio / (sigma sqrt(n))` with `sigma` the spread of per-observation differences.
    pub normalized_ratio: f64,
    /// Two-sided significance of the sign of `ratio`.
    pub p_value: f64,
    /// Fitted parameters of the alternative on the tail.
    pub parameters: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFailure {
    pub alternative: Alternative,
    pub reason: String,
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fit failed: {}", self.alternative, self.reason)
    }
}

impl std::error::Error for FitFailure {}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub exponential: Result<LikelihoodRatioTest, FitFailure>,
    pub lognormal: Result<LikelihoodRatioTest, FitFailure>,
    pub stretched_exponential: Result<LikelihoodRatioTest, FitFailure>,
}

impl ModelComparison {
    pub fn get(&self, alt: Alternative) -> &Result<LikelihoodRatioTest, FitFailure> {
        match alt {
            Alternative::Exponential => &self.exponential,
            Alternative::Lognormal => &self.lognormal,
            Alternative::StretchedExponential => &self.stretched_exponential,
        }
    }
}

/// `ln erfc(z)`, switching to the asymptotic series where `erfc` underflows.
fn ln_erfc(z: f64) -> f64 {
    if z < 20.0 {
        erfc(z).ln()
    } else {
        let z2 = z * z;
        -z2 - (z * PI.sqrt()).ln() + (1.0 - 0.5 / z2 + 0.75 / (z2 * z2)).ln()
    }
}

struct Tail {
    values: Vec<f64>,
    lower: f64,
}

impl Tail {
    fn power_law(&self, alpha: f64) -> Vec<f64> {
        let l = self.lower;
        self.values
            .iter()
            .map(|&x| (alpha - 1.0).ln() - l.ln() - alpha * (x / l).ln())
            .collect()
    }

    fn exponential(&self, rate: f64) -> Vec<f64> {
        self.values
            .iter()
            .map(|&x| rate.ln() - rate * (x - self.lower))
            .collect()
    }

    fn lognormal(&self, mu: f64, sigma: f64) -> Vec<f64> {
        let norm = ln_erfc((self.lower.ln() - mu) / (sigma * SQRT_2)) - 2f64.ln();
        let base = -sigma.ln() - 0.5 * (2.0 * PI).ln() - norm;
        self.values
            .iter()
            .map(|&x| {
                let z = (x.ln() - mu) / sigma;
                base - x.ln() - 0.5 * z * z
            })
            .collect()
    }

    fn stretched_exponential(&self, shape: f64, rate: f64) -> Vec<f64> {
        let offset = (rate * self.lower).powf(shape);
        let base = shape.ln() + shape * rate.ln();
        self.values
            .iter()
            .map(|&x| base + (shape - 1.0) * x.ln() - (rate * x).powf(shape) + offset)
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn vuong(power: &[f64], alt: &[f64], parameters: [f64; 2]) -> LikelihoodRatioTest {
    let n = power.len() as f64;
    let diffs: Vec<f64> = power.iter().zip(alt).map(|(a, b)| a - b).collect();
    let ratio: f64 = diffs.iter().sum();
    let m = ratio / n;
    let sigma = (diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / n).sqrt();
    let (normalized_ratio, p_value) = if sigma > 0.0 {
        let z = ratio / (sigma * n.sqrt());
        (z, erfc(z.abs() / SQRT_2).clamp(0.0, 1.0))
    } else {
        (0.0, 1.0)
    };
    LikelihoodRatioTest {
        ratio,
        normalized_ratio,
        p_value,
        parameters,
    }
}

// Box on the optimizer's working coordinates; the objective is +inf outside it.
const LOG_BOUND: f64 = 50.0;
const MU_BOUND: f64 = 200.0;

fn fit_two_parameters<F>(
    alternative: Alternative,
    start: [f64; 2],
    neg_mean_ll: F,
) -> Result<[f64; 2], FitFailure>
where
    F: Fn([f64; 2]) -> f64,
{
    let min = simplex::minimize(neg_mean_ll, start, Options::default());
    if !min.converged {
        return Err(FitFailure {
            alternative,
            reason: format!("no convergence after {} iterations", min.iterations),
        });
    }
    if !min.value.is_finite() {
        return Err(FitFailure {
            alternative,
            reason: "likelihood is not finite at the optimum".into(),
        });
    }
    Ok(min.point)
}

/// Likelihood-ratio comparison of a fitted power-law tail against exponential,
/// lognormal and stretched-exponential (Weibull) alternatives.
///
/// Every alternative is fitted by maximum likelihood on the same tail
/// `x >= xmin`, truncated at the continuous lower bound `xmin - 1/2`.
/// A failed alternative fit is reported in its slot and does not abort the rest.
pub fn compare_distributions(sample: &[u64], fit: &PowerLawFit) -> Result<ModelComparison> {
    let values: Vec<f64> = sample
        .iter()
        .filter(|&&x| x >= fit.xmin)
        .map(|&x| x as f64)
        .collect();
    if values.len() != fit.n_tail || values.len() < 2 {
        return Err(Error::Parameter {
            name: "fit",
            reason: format!(
                "fit has {} tail observations but the sample has {} at or above xmin {}",
                fit.n_tail,
                values.len(),
                fit.xmin
            ),
        });
    }
    let tail = Tail {
        values,
        lower: fit.shifted_xmin(),
    };
    let power = tail.power_law(fit.alpha);

    let exponential = {
        let excess = mean(&tail.values) - tail.lower;
        let rate = 1.0 / excess;
        Ok(vuong(&power, &tail.exponential(rate), [rate, f64::NAN]))
    };

    let logs: Vec<f64> = tail.values.iter().map(|x| x.ln()).collect();
    let log_mean = mean(&logs);
    let log_sd = (logs.iter().map(|l| (l - log_mean).powi(2)).sum::<f64>() / logs.len() as f64)
        .sqrt()
        .max(1e-3);

    let lognormal = fit_two_parameters(Alternative::Lognormal, [log_mean, log_sd.ln()], |[mu, ln_sigma]| {
        if mu.abs() > MU_BOUND || ln_sigma.abs() > LOG_BOUND {
            return f64::INFINITY;
        }
        -mean(&tail.lognormal(mu, ln_sigma.exp()))
    })
    .map(|[mu, ln_sigma]| {
        let sigma = ln_sigma.exp();
        vuong(&power, &tail.lognormal(mu, sigma), [mu, sigma])
    });

    let stretched_exponential = fit_two_parameters(
        Alternative::StretchedExponential,
        [0.0, (1.0 / mean(&tail.values)).ln()],
        |[ln_shape, ln_rate]| {
            if ln_shape.abs() > LOG_BOUND || ln_rate.abs() > LOG_BOUND {
                return f64::INFINITY;
            }
            -mean(&tail.stretched_exponential(ln_shape.exp(), ln_rate.exp()))
        },
    )
    .map(|[ln_shape, ln_rate]| {
        let (shape, rate) = (ln_shape.exp(), ln_rate.exp());
        vuong(&power, &tail.stretched_exponential(shape, rate), [shape, rate])
    });

    Ok(ModelComparison {
        exponential,
        lognormal,
        stretched_exponential,
    })
}
