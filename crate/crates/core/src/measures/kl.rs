//! KL divergence between top-K rank-frequency vectors of consecutive windows,
//! and its uniform-random baseline.
//!
//! Frequencies are compared by rank position: the i-th most frequent tag after
//! `N + M` assignments against the i-th most frequent after `N`, whatever the
//! tags are. Both vectors are truncated to the same `K'` and renormalized.

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::generators::{generate_corpus, GeneratorConfig, TagModel};
use crate::stream::TagStream;

const SUM_TOLERANCE: f64 = 1e-9;

/// `sum_i P_i ln(P_i / Q_i)` with `0 ln(0/q) = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape {
            left: p.len(),
            right: q.len(),
        });
    }
    for (name, v) in [("P", p), ("Q", q)] {
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(param("distribution", format!("{name} has a negative or non-finite entry")));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(param("distribution", format!("{name} sums to {total}, not 1")));
        }
    }
    let mut sum = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::Support { index: i });
        }
        sum += pi * (pi / qi).ln();
    }
    // Rounding can leave a tiny negative residue when P ~ Q.
    Ok(sum.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlPoint {
    pub n: usize,
    pub kl: f64,
}

fn normalized_top(freqs: &[u64], k: usize) -> Vec<f64> {
    let top = &freqs[..k];
    let total: u64 = top.iter().sum();
    top.iter().map(|&c| c as f64 / total as f64).collect()
}

/// KL between the top-`k` rank frequencies after `N + window` and after `N`
/// assignments, for `N = window, 2 window, ...`.
pub fn kl_topk_trajectory(stream: &TagStream, window: usize, k: usize) -> Result<Vec<KlPoint>> {
    if window == 0 {
        return Err(param("m", "window must be at least 1"));
    }
    if k == 0 {
        return Err(Error::InsufficientData("top-K of zero ranks".into()));
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
    let mut previous = stream.snapshot(window)?.rank_frequencies();
    let mut points = Vec::with_capacity(stream.len() / window);
    let mut n = window;
    while n + window <= stream.len() {
        let current = stream.snapshot(n + window)?.rank_frequencies();
        let depth = k.min(previous.len()).min(current.len());
        let kl = kl_divergence(&normalized_top(&current, depth), &normalized_top(&previous, depth))?;
        points.push(KlPoint { n, kl });
        previous = current;
        n += window;
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselinePoint {
    pub n: usize,
    pub mean_kl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub window: usize,
    pub k: usize,
    pub vocabulary: usize,
    pub length: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Mean KL trajectory over `trials` uniform-random streams.
pub fn kl_random_baseline(cfg: &BaselineConfig) -> Result<Vec<BaselinePoint>> {
    if cfg.trials == 0 {
        return Err(param("trials", "must be at least 1"));
    }
    let gen = GeneratorConfig {
        model: TagModel::RandomUniform {
            vocabulary: cfg.vocabulary,
        },
        length: cfg.length,
        n_streams: cfg.trials,
        seed: cfg.seed,
    };
    let corpus = generate_corpus(&gen)?;
    let trajectories = corpus
        .par_iter()
        .map(|s| kl_topk_trajectory(s, cfg.window, cfg.k))
        .collect::<Result<Vec<_>>>()?;
    let first = &trajectories[0];
    Ok(first
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let total: f64 = trajectories.iter().map(|tr| tr[i].kl).sum();
            BaselinePoint {
                n: pt.n,
                mean_kl: total / trajectories.len() as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_distributions() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn two_point_value() {
        // 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1)
        let expected = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        let got = kl_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.5108, epsilon = 1e-4);
    }

    #[test]
    fn support_and_shape_errors() {
        assert!(matches!(kl_divergence(&[1.0, 0.0], &[0.0, 1.0]), Err(Error::Support { index: 0 })));
        assert!(matches!(kl_divergence(&[1.0], &[0.5, 0.5]), Err(Error::Shape { .. })));
        assert!(kl_divergence(&[0.5, 0.4], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn zero_mass_terms_vanish() {
        let got = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(got, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn windows_with_same_shape() {
        // Each window of 2 adds one a and one b: top frequencies always equal.
        let s = TagStream::from_tags("r", ["a", "b", "a", "b", "a", "b", "a", "b"]).unwrap();
        let traj = kl_topk_trajectory(&s, 2, 25).unwrap();
        assert_eq!(traj.iter().map(|p| p.n).collect::<Vec<_>>(), vec![2, 4, 6]);
        assert!(traj.iter().all(|p| p.kl == 0.0));
    }

    #[test]
    fn composed_value() {
        // (9, 1) after ten assignments, (10, 10) after twenty.
        let mut tags = vec!["a"; 9];
        tags.push("b");
        tags.push("a");
        tags.extend(vec!["b"; 9]);
        let s = TagStream::from_tags("r", tags).unwrap();
        let traj = kl_topk_trajectory(&s, 10, 2).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0].n, 10);
        let expected = kl_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(traj[0].kl, expected, epsilon = 1e-15);
    }

    #[test]
    fn short_stream_errors() {
        let s = TagStream::from_tags("r", ["a", "b", "c"]).unwrap();
        assert!(matches!(kl_topk_trajectory(&s, 2, 25), Err(Error::InsufficientData(_))));
        assert!(matches!(kl_topk_trajectory(&s, 1, 0), Err(Error::InsufficientData(_))));
    }
}
