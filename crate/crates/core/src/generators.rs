//! Synthetic tagging streams under simple tag-choice dynamics.
//!
//! * random: every token of a fixed vocabulary is equally likely,
//! * imitation: a Polya urn, the next tag copies a uniformly chosen earlier
//!   assignment of the same stream,
//! * background: independent draws from a shared token distribution,
//! * mixture: imitation with probability `I`, background otherwise.
//!
//! Every stream is driven by its own ChaCha stream derived from `(seed, index)`,
//! so a corpus is identical however its streams are scheduled.

use std::io::BufRead;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::stream::{Tag, TagStream};

/// Token distribution shared by all simulated users.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundDistribution {
    tokens: Vec<Tag>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BackgroundDistribution {
    /// Builds a distribution proportional to non-negative weights.
    pub fn from_weights(tokens: Vec<Tag>, weights: Vec<f64>) -> Result<Self> {
        if tokens.len() != weights.len() {
            return Err(Error::Shape {
                left: tokens.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(param("weights", "must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(param("weights", "need at least one positive weight"));
        }
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(BackgroundDistribution {
            tokens,
            probabilities,
            cumulative,
        })
    }

    pub fn tokens(&self) -> &[Tag] {
        &self.tokens
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // u can round up to the total.
        i.min(self.tokens.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Tag {
        &self.tokens[self.sample_index(rng)]
    }
}

fn vocabulary_token(prefix: char, index: usize) -> Tag {
    Tag::new(&format!("{prefix}{index}")).expect("generated token is non-empty")
}

/// Zipf background over `vocabulary` tokens `w1..wV`: `P(r) ∝ r^-s`.
pub fn zipf_background(vocabulary: usize, exponent: f64) -> Result<BackgroundDistribution> {
    if vocabulary == 0 {
        return Err(param("vocabulary", "must be at least 1"));
    }
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(param("zipf exponent", format!("{exponent} is not positive")));
    }
    let tokens = (1..=vocabulary).map(|r| vocabulary_token('w', r)).collect();
    let weights = (1..=vocabulary).map(|r| (r as f64).powf(-exponent)).collect();
    BackgroundDistribution::from_weights(tokens, weights)
}

/// Reads a `token<TAB>count` table without header.
pub fn load_background<R: BufRead>(reader: R) -> Result<BackgroundDistribution> {
    let mut index = std::collections::HashMap::new();
    let mut tokens = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(token), Some(count), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Ingestion {
                row,
                reason: "expected two tab-separated columns".into(),
            });
        };
        let tag = Tag::new(token).map_err(|_| Error::Ingestion {
            row,
            reason: "empty token".into(),
        })?;
        let count: f64 = count.trim().parse().map_err(|_| Error::Ingestion {
            row,
            reason: format!("count {count:?} is not a number"),
        })?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(Error::Ingestion {
                row,
                reason: format!("count {count} is negative or not finite"),
            });
        }
        match index.get(&tag) {
            Some(&j) => weights[j] += count,
            None => {
                index.insert(tag.clone(), tokens.len());
                tokens.push(tag);
                weights.push(count);
            }
        }
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::NoData("background table has no positive counts".into()));
    }
    BackgroundDistribution::from_weights(tokens, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TagModel {
    RandomUniform {
        vocabulary: usize,
    },
    /// Pure Polya urn; the first tag is drawn uniformly from `vocabulary` tokens.
    Imitation {
        vocabulary: usize,
    },
    Background {
        background: Arc<BackgroundDistribution>,
    },
    /// Imitation with probability `imitation_rate`; an empty urn falls back to background.
    Mixture {
        imitation_rate: f64,
        background: Arc<BackgroundDistribution>,
    },
}

impl TagModel {
    pub fn name(&self) -> &'static str {
        match self {
            TagModel::RandomUniform { .. } => "random_uniform",
            TagModel::Imitation { .. } => "imitation",
            TagModel::Background { .. } => "background",
            TagModel::Mixture { .. } => "mixture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub model: TagModel,
    /// Assignments per stream.
    pub length: usize,
    pub n_streams: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(param("length", "must be at least 1"));
        }
        if self.n_streams == 0 {
            return Err(param("streams", "must be at least 1"));
        }
        match &self.model {
            TagModel::RandomUniform { vocabulary } | TagModel::Imitation { vocabulary } => {
                if *vocabulary == 0 {
                    return Err(param("vocabulary", "must be at least 1"));
                }
            }
            TagModel::Background { .. } => {}
            TagModel::Mixture { imitation_rate, .. } => {
                if !(0.0..=1.0).contains(imitation_rate) {
                    return Err(Error::OutOfRange {
                        what: "imitation rate",
                        value: imitation_rate.to_string(),
                        range: "[0, 1]".into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn resource_id(&self, index: usize) -> String {
        let width = self.n_streams.saturating_sub(1).to_string().len().max(4);
        format!("stream-{index:0width$}")
    }
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// The `index`-th stream of the corpus described by `config`.
pub fn generate_stream(config: &GeneratorConfig, index: usize) -> Result<TagStream> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, index);
    let t = config.length;
    let mut tags: Vec<Tag> = Vec::with_capacity(t);
    match &config.model {
        TagModel::RandomUniform { vocabulary } => {
            let uniform: Vec<Tag> = (1..=*vocabulary).map(|i| vocabulary_token('t', i)).collect();
            for _ in 0..t {
                tags.push(uniform[rng.random_range(0..*vocabulary)].clone());
            }
        }
        TagModel::Imitation { vocabulary } => {
            tags.push(vocabulary_token('t', rng.random_range(1..=*vocabulary)));
            while tags.len() < t {
                let pick = rng.random_range(0..tags.len());
                tags.push(tags[pick].clone());
            }
        }
        TagModel::Background { background } => {
            for _ in 0..t {
                tags.push(background.sample(&mut rng).clone());
            }
        }
        TagModel::Mixture {
            imitation_rate,
            background,
        } => {
            let rate = *imitation_rate;
            for _ in 0..t {
                let imitate = match rate {
                    r if r <= 0.0 => false,
                    r if r >= 1.0 => true,
                    r => rng.random_bool(r),
                };
                let next = if imitate && !tags.is_empty() {
                    tags[rng.random_range(0..tags.len())].clone()
                } else {
                    background.sample(&mut rng).clone()
                };
                tags.push(next);
            }
        }
    }
    Ok(TagStream::from_normalized(config.resource_id(index), tags))
}

/// All `n_streams` streams, in index order.
pub fn generate_corpus(config: &GeneratorConfig) -> Result<Vec<TagStream>> {
    config.validate()?;
    (0..config.n_streams)
        .into_par_iter()
        .map(|i| generate_stream(config, i))
        .collect()
}
