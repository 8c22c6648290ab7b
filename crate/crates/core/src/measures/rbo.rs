//! Rank biased overlap over competition-ranked tag lists.
//!
//! Three variants are provided. `Plain` is the classic prefix-overlap sum for
//! tie-free rankings, `TieAware` divides twice the overlap by the combined
//! prefix size so tied items are counted where they occur, and `TieCorrected`
//! evaluates the tie-aware agreement only at the rank values that actually
//! occur in either list. Skipping the depths hidden by ties lowers the score
//! of rankings that have not separated their tags.
//!
//! All variants use the truncated prefix sum up to the deepest rank present,
//! with no extrapolation past the end of the lists. Identical tie-free lists of
//! length `D` therefore score `1 - p^D`, not 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::stream::{RankedList, ResourceId, TagStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RboVariant {
    Plain,
    TieAware,
    #[default]
    TieCorrected,
}

impl fmt::Display for RboVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RboVariant::Plain => "plain",
            RboVariant::TieAware => "tie_aware",
            RboVariant::TieCorrected => "tie_corrected",
        })
    }
}

impl FromStr for RboVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(RboVariant::Plain),
            "tie_aware" | "tie-aware" => Ok(RboVariant::TieAware),
            "tie_corrected" | "tie-corrected" => Ok(RboVariant::TieCorrected),
            other => Err(param(
                "variant",
                format!("unknown variant {other:?} (plain, tie_aware, tie_corrected)"),
            )),
        }
    }
}

/// Persistence `p` in `[0, 1)` plus the variant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RboParams {
    p: f64,
    variant: RboVariant,
}

impl RboParams {
    pub const DEFAULT_P: f64 = 0.9;

    pub fn new(p: f64, variant: RboVariant) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::OutOfRange {
                what: "persistence p",
                value: p.to_string(),
                range: "[0, 1)".into(),
            });
        }
        Ok(RboParams { p, variant })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn variant(&self) -> RboVariant {
        self.variant
    }
}

impl Default for RboParams {
    fn default() -> Self {
        RboParams {
            p: Self::DEFAULT_P,
            variant: RboVariant::TieCorrected,
        }
    }
}

/// Rank biased overlap of two ranked lists; symmetric, in `[0, 1]`.
pub fn rbo(first: &RankedList, second: &RankedList, params: &RboParams) -> Result<f64> {
    if first.is_empty() || second.is_empty() {
        return Err(Error::EmptyInput("ranked list has no entries"));
    }
    let p = params.p;
    let value = match params.variant {
        RboVariant::Plain => plain(first, second, p),
        RboVariant::TieAware | RboVariant::TieCorrected => {
            tie_aware(first, second, p, params.variant == RboVariant::TieCorrected)
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

// Listing position stands in for rank so the prefix at depth d holds exactly d items.
fn plain(first: &RankedList, second: &RankedList, p: f64) -> f64 {
    let depth = first.len().max(second.len());
    let pos1: std::collections::HashMap<&str, usize> = first
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.tag.as_str(), i + 1))
        .collect();
    let mut joint = vec![0usize; depth + 1];
    for (i, e) in second.entries().iter().enumerate() {
        if let Some(&j) = pos1.get(e.tag.as_str()) {
            joint[j.max(i + 1)] += 1;
        }
    }
    let mut overlap = 0usize;
    let mut sum = 0.0;
    for d in 1..=depth {
        overlap += joint[d];
        sum += overlap as f64 / d as f64 * p.powi(d as i32 - 1);
    }
    (1.0 - p) * sum
}

fn tie_aware(first: &RankedList, second: &RankedList, p: f64, occurring_only: bool) -> f64 {
    let depth = first.max_rank().max(second.max_rank()) as usize;
    let mut size1 = vec![0usize; depth + 1];
    let mut size2 = vec![0usize; depth + 1];
    let mut joint = vec![0usize; depth + 1];
    let ranks1 = first.rank_map();
    for e in first.entries() {
        size1[e.rank as usize] += 1;
    }
    for e in second.entries() {
        size2[e.rank as usize] += 1;
        if let Some(&r1) = ranks1.get(e.tag.as_str()) {
            joint[r1.max(e.rank) as usize] += 1;
        }
    }
    let (mut n1, mut n2, mut overlap) = (0usize, 0usize, 0usize);
    let mut sum = 0.0;
    for d in 1..=depth {
        let occurs = size1[d] > 0 || size2[d] > 0;
        n1 += size1[d];
        n2 += size2[d];
        overlap += joint[d];
        if occurring_only && !occurs {
            continue;
        }
        let agreement = 2.0 * overlap as f64 / (n1 + n2) as f64;
        sum += agreement * p.powi(d as i32 - 1);
    }
    (1.0 - p) * sum
}

/// Share of the total RBO weight carried by the first `depth` ranks.
pub fn weight_of_prefix(p: f64, depth: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            what: "persistence p",
            value: p.to_string(),
            range: "(0, 1)".into(),
        });
    }
    if depth == 0 {
        return Err(param("depth", "must be at least 1"));
    }
    let d = depth as f64;
    let partial: f64 = (1..depth).map(|i| p.powi(i as i32) / i as f64).sum();
    Ok(1.0 - p.powi(depth as i32 - 1) + (1.0 - p) / p * d * ((1.0 / (1.0 - p)).ln() - partial))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RboPoint {
    pub t: usize,
    pub rbo: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RboTrajectory {
    pub resource_id: ResourceId,
    pub window: usize,
    pub params: RboParams,
    pub points: Vec<RboPoint>,
}

/// RBO between the rankings after `t - window` and `t` assignments.
pub fn rbo_at(stream: &TagStream, t: usize, window: usize, params: &RboParams) -> Result<f64> {
    if window == 0 {
        return Err(param("window", "must be at least 1"));
    }
    if t <= window || t > stream.len() {
        return Err(Error::InsufficientData(format!(
            "need {} < t <= {} for window {}, got t = {}",
            window,
            stream.len(),
            window,
            t
        )));
    }
    let before = stream.snapshot(t - window)?.rank()?;
    let after = stream.snapshot(t)?.rank()?;
    rbo(&before, &after, params)
}

/// Window-to-window RBO at `t = 2W, 3W, ...` up to the stream length.
pub fn rbo_trajectory(stream: &TagStream, window: usize, params: &RboParams) -> Result<RboTrajectory> {
    if window == 0 {
        return Err(param("window", "must be at least 1"));
    }
    if stream.len() < 2 * window {
        return Err(Error::InsufficientData(format!(
            "stream {} has {} assignments, window {} needs at least {}",
            stream.resource_id(),
            stream.len(),
            window,
            2 * window
        )));
    }
    let mut previous = stream.snapshot(window)?.rank()?;
    let mut points = Vec::with_capacity(stream.len() / window);
    for t in (2 * window..=stream.len()).step_by(window) {
        let current = stream.snapshot(t)?.rank()?;
        points.push(RboPoint {
            t,
            rbo: rbo(&previous, &current, params)?,
        });
        previous = current;
    }
    Ok(RboTrajectory {
        resource_id: stream.resource_id().clone(),
        window,
        params: *params,
        points,
    })
}
