//! Semantic stabilization of annotation streams.
//!
//! A resource's stream of tag assignments is considered stable once new
//! assignments stop changing the ranking of its tags. This crate measures that
//! with rank biased overlap between consecutive windows (including a variant
//! that penalizes tied ranks), aggregates it into a corpus-level surface
//! `f(t, k)`, and ships the older baselines (tag proportions, windowed KL
//! divergence, power-law tail fits) alongside generators for synthetic streams.
//!
//! ```
//! use semstab::measures::{rbo, RboParams};
//! use semstab::stream::RankedList;
//!
//! let a = RankedList::from_ranks([("a", 1), ("b", 1), ("c", 1), ("d", 4)]).unwrap();
//! let score = rbo(&a, &a, &RboParams::default()).unwrap();
//! assert!((score - 0.1729).abs() < 1e-9);
//! ```

pub mod error;
pub mod generators;
pub mod io;
pub mod measures;
pub mod powerlaw;
pub mod stability;
pub mod stream;

pub use error::{Error, Result};
pub use stream::{FrequencySnapshot, RankedList, ResourceId, Tag, TagAssignment, TagStream};
