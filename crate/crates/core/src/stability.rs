//! Corpus-level stabilization: the share of streams whose ranking after `t`
//! assignments agrees with the ranking one window earlier by more than `k`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::measures::{rbo_at, RboParams};
use crate::stream::TagStream;

fn check_t(t: usize, window: usize) -> Result<()> {
    if window == 0 {
        return Err(param("window", "must be at least 1"));
    }
    if !t.is_multiple_of(window) || t < 2 * window {
        return Err(param(
            "t",
            format!("{t} must be a multiple of the window {window} and at least {}", 2 * window),
        ));
    }
    Ok(())
}

/// Window-to-window RBO at `t` of every stream long enough to reach `t`.
fn eligible_rbo(corpus: &[TagStream], t: usize, window: usize, params: &RboParams) -> Result<Vec<f64>> {
    check_t(t, window)?;
    let values = corpus
        .par_iter()
        .filter(|s| s.len() >= t)
        .map(|s| rbo_at(s, t, window, params))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::InsufficientData(format!("no stream has {t} assignments")));
    }
    Ok(values)
}

fn fraction_above(values: &[f64], k: f64) -> f64 {
    values.iter().filter(|&&v| v > k).count() as f64 / values.len() as f64
}

/// `f(t, k)`: share of eligible streams with RBO strictly greater than `k`.
///
/// Streams shorter than `t` are left out of both numerator and denominator.
pub fn stabilization_fraction(
    corpus: &[TagStream],
    t: usize,
    k: f64,
    window: usize,
    params: &RboParams,
) -> Result<f64> {
    Ok(fraction_above(&eligible_rbo(corpus, t, window, params)?, k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySurface {
    pub t_grid: Vec<usize>,
    pub k_grid: Vec<f64>,
    /// `values[j][m] = f(t_grid[j], k_grid[m])`.
    pub values: Vec<Vec<f64>>,
    /// Streams counted at each `t`.
    pub eligible: Vec<usize>,
    pub window: usize,
    pub params: RboParams,
}

impl StabilitySurface {
    pub fn get(&self, t_index: usize, k_index: usize) -> f64 {
        self.values[t_index][k_index]
    }

    /// Largest grid `k` with `f(t, k) >= level`, if any.
    pub fn threshold_at(&self, t_index: usize, level: f64) -> Option<f64> {
        self.k_grid
            .iter()
            .zip(&self.values[t_index])
            .filter(|(_, &f)| f >= level)
            .map(|(&k, _)| k)
            .next_back()
    }

    /// `(t, k, f)` triples, t-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.t_grid.iter().zip(&self.values).flat_map(move |(&t, row)| {
            self.k_grid.iter().zip(row).map(move |(&k, &f)| (t, k, f))
        })
    }
}

fn check_increasing<T: PartialOrd + Copy>(name: &'static str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(param(name, "grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(param(name, "grid must be strictly increasing"));
    }
    Ok(())
}

/// `f(t, k)` over a grid of assignment counts and thresholds.
pub fn stability_surface(
    corpus: &[TagStream],
    t_grid: &[usize],
    k_grid: &[f64],
    window: usize,
    params: &RboParams,
) -> Result<StabilitySurface> {
    check_increasing("t grid", t_grid)?;
    check_increasing("k grid", k_grid)?;
    if k_grid.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(param("k grid", "thresholds must lie in [0, 1]"));
    }
    let mut values = Vec::with_capacity(t_grid.len());
    let mut eligible = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let rbos = eligible_rbo(corpus, t, window, params)?;
        values.push(k_grid.iter().map(|&k| fraction_above(&rbos, k)).collect());
        eligible.push(rbos.len());
    }
    Ok(StabilitySurface {
        t_grid: t_grid.to_vec(),
        k_grid: k_grid.to_vec(),
        values,
        eligible,
        window,
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityLevel {
    None,
    Medium,
    High,
}

impl fmt::Display for StabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityLevel::None => "none",
            StabilityLevel::Medium => "medium",
            StabilityLevel::High => "high",
        })
    }
}

/// Below 0.4 is no stability, `[0.4, 0.7]` medium, above 0.7 high.
pub fn classify_stability(rbo: f64) -> Result<StabilityLevel> {
    if !(0.0..=1.0).contains(&rbo) {
        return Err(Error::OutOfRange {
            what: "rbo",
            value: rbo.to_string(),
            range: "[0, 1]".into(),
        });
    }
    Ok(if rbo < 0.4 {
        StabilityLevel::None
    } else if rbo <= 0.7 {
        StabilityLevel::Medium
    } else {
        StabilityLevel::High
    })
}
