//! Stream stability measures: rank biased overlap and windowed KL divergence.

mod kl;
mod rbo;

pub use kl::{kl_divergence, kl_random_baseline, kl_topk_trajectory, BaselineConfig, BaselinePoint, KlPoint};
pub use rbo::{rbo, rbo_at, rbo_trajectory, weight_of_prefix, RboParams, RboPoint, RboTrajectory, RboVariant};
