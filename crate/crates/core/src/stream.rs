//! Annotation streams and the frequency views derived from them.
//!
//! A [`TagStream`] is the ordered sequence of single-tag assignments made to one
//! resource. Prefixes of a stream are summarized as a [`FrequencySnapshot`] and
//! ranked with competition ranking into a [`RankedList`], which is what the rank
//! similarity measures consume.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{param, Error, Result};

/// A normalized annotation token: trimmed, lowercased, never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(String);

impl Tag {
    pub fn new(raw: &str) -> Result<Self> {
        let normalized = raw.trim().to_lowercase();
        if normalized.is_empty() {
            return Err(Error::InvalidTag(raw.to_owned()));
        }
        Ok(Tag(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Tag {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque identifier of the resource a stream annotates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(String);

impl ResourceId {
    pub fn new(id: impl Into<String>) -> Self {
        ResourceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<S: Into<String>> From<S> for ResourceId {
    fn from(s: S) -> Self {
        ResourceId(s.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagAssignment {
    pub resource_id: ResourceId,
    pub tag: Tag,
    /// 1-based position within the resource's stream.
    pub seq: u64,
    pub user_id: Option<String>,
}

/// Temporally ordered single-tag assignments for one resource.
///
/// Sequence numbers are contiguous from 1 and every assignment carries the
/// stream's resource id; both are checked on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagStream {
    resource_id: ResourceId,
    assignments: Vec<TagAssignment>,
}

impl TagStream {
    /// Builds a stream from raw tokens in order, normalizing each one.
    pub fn from_tags<I, S>(resource_id: impl Into<ResourceId>, tags: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let resource_id = resource_id.into();
        let assignments = tags
            .into_iter()
            .enumerate()
            .map(|(i, raw)| {
                Ok(TagAssignment {
                    resource_id: resource_id.clone(),
                    tag: Tag::new(raw.as_ref())?,
                    seq: i as u64 + 1,
                    user_id: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TagStream {
            resource_id,
            assignments,
        })
    }

    /// Builds a stream from already-normalized tags.
    pub fn from_normalized(resource_id: impl Into<ResourceId>, tags: Vec<Tag>) -> Self {
        let resource_id = resource_id.into();
        let assignments = tags
            .into_iter()
            .enumerate()
            .map(|(i, tag)| TagAssignment {
                resource_id: resource_id.clone(),
                tag,
                seq: i as u64 + 1,
                user_id: None,
            })
            .collect();
        TagStream {
            resource_id,
            assignments,
        }
    }

    pub fn from_assignments(
        resource_id: impl Into<ResourceId>,
        assignments: Vec<TagAssignment>,
    ) -> Result<Self> {
        let resource_id = resource_id.into();
        for (i, a) in assignments.iter().enumerate() {
            if a.resource_id != resource_id {
                return Err(Error::InvalidStream(format!(
                    "assignment {} belongs to {} not {}",
                    i + 1,
                    a.resource_id,
                    resource_id
                )));
            }
            if a.seq != i as u64 + 1 {
                return Err(Error::InvalidStream(format!(
                    "expected seq {} at position {}, found {}",
                    i + 1,
                    i + 1,
                    a.seq
                )));
            }
        }
        Ok(TagStream {
            resource_id,
            assignments,
        })
    }

    pub fn resource_id(&self) -> &ResourceId {
        &self.resource_id
    }

    pub fn assignments(&self) -> &[TagAssignment] {
        &self.assignments
    }

    pub fn tags(&self) -> impl ExactSizeIterator<Item = &Tag> + '_ {
        self.assignments.iter().map(|a| &a.tag)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Tag counts over the first `n` assignments.
    pub fn snapshot(&self, n: usize) -> Result<FrequencySnapshot> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange {
                what: "prefix length",
                value: n.to_string(),
                range: format!("[1, {}]", self.len()),
            });
        }
        let mut counts = BTreeMap::new();
        for tag in self.tags().take(n) {
            *counts.entry(tag.clone()).or_insert(0u64) += 1;
        }
        Ok(FrequencySnapshot {
            resource_id: self.resource_id.clone(),
            prefix_len: n,
            counts,
        })
    }

    /// Relative tag proportions at every multiple of `window`.
    pub fn proportion_trajectory(&self, window: usize) -> Result<Vec<ProportionPoint>> {
        if window == 0 {
            return Err(param("window", "must be at least 1"));
        }
        if self.is_empty() {
            return Err(Error::EmptyInput("stream has no assignments"));
        }
        let mut counts: BTreeMap<&Tag, u64> = BTreeMap::new();
        let mut points = Vec::with_capacity(self.len() / window);
        for (i, tag) in self.tags().enumerate() {
            *counts.entry(tag).or_insert(0) += 1;
            let t = i + 1;
            if t % window == 0 {
                let total = t as f64;
                let proportions = counts
                    .iter()
                    .map(|(tag, &c)| ((*tag).clone(), c as f64 / total))
                    .collect();
                points.push(ProportionPoint { t, proportions });
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionPoint {
    pub t: usize,
    pub proportions: BTreeMap<Tag, f64>,
}

/// Tag → count map over a prefix of a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySnapshot {
    resource_id: ResourceId,
    prefix_len: usize,
    counts: BTreeMap<Tag, u64>,
}

impl FrequencySnapshot {
    /// Builds a snapshot from explicit counts; zero counts are rejected.
    pub fn from_counts<I, S>(resource_id: impl Into<ResourceId>, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (raw, c) in counts {
            if c == 0 {
                return Err(param("count", format!("tag {:?} has zero count", raw.as_ref())));
            }
            *map.entry(Tag::new(raw.as_ref())?).or_insert(0) += c;
        }
        let prefix_len = map.values().sum::<u64>() as usize;
        Ok(FrequencySnapshot {
            resource_id: resource_id.into(),
            prefix_len,
            counts: map,
        })
    }

    pub fn resource_id(&self) -> &ResourceId {
        &self.resource_id
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn counts(&self) -> &BTreeMap<Tag, u64> {
        &self.counts
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Counts sorted descending, ties in tag order: the frequency at each rank position.
    pub fn rank_frequencies(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.counts.values().copied().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// Competition ranking of the snapshot's tags.
    pub fn rank(&self) -> Result<RankedList> {
        if self.counts.is_empty() {
            return Err(Error::EmptyInput("snapshot has no tags"));
        }
        let mut items: Vec<(&Tag, u64)> = self.counts.iter().map(|(t, &c)| (t, c)).collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut entries = Vec::with_capacity(items.len());
        let mut rank = 1u32;
        for (pos, (tag, count)) in items.iter().enumerate() {
            if pos > 0 && items[pos - 1].1 != *count {
                rank = pos as u32 + 1;
            }
            entries.push(RankedEntry {
                tag: (*tag).clone(),
                count: Some(*count),
                rank,
            });
        }
        Ok(RankedList { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedEntry {
    pub tag: Tag,
    /// Absent when the list was built from ranks alone.
    pub count: Option<u64>,
    pub rank: u32,
}

/// Tags with competition ranks (1, 2, 2, 4, ...), listed by rank then tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Builds a list from explicit `(tag, rank)` pairs in any order.
    ///
    /// The ranks must form a competition ranking and tags must be distinct.
    pub fn from_ranks<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: AsRef<str>,
    {
        let mut entries = pairs
            .into_iter()
            .map(|(raw, rank)| {
                Ok(RankedEntry {
                    tag: Tag::new(raw.as_ref())?,
                    count: None,
                    rank,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.is_empty() {
            return Err(Error::EmptyInput("ranked list has no entries"));
        }
        entries.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.tag.cmp(&b.tag)));
        for (pos, e) in entries.iter().enumerate() {
            if pos > 0 && entries[pos - 1].tag == e.tag {
                return Err(param("ranks", format!("duplicate tag {}", e.tag)));
            }
            let expected = if pos > 0 && entries[pos - 1].rank == e.rank {
                e.rank
            } else {
                pos as u32 + 1
            };
            if e.rank != expected {
                return Err(param(
                    "ranks",
                    format!("{} has rank {}, competition ranking requires {}", e.tag, e.rank, expected),
                ));
            }
        }
        Ok(RankedList { entries })
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    /// Number of distinct tags.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_rank(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.rank)
    }

    pub fn rank_of(&self, tag: &str) -> Option<u32> {
        self.entries.iter().find(|e| e.tag.as_str() == tag).map(|e| e.rank)
    }

    pub(crate) fn rank_map(&self) -> HashMap<&str, u32> {
        self.entries.iter().map(|e| (e.tag.as_str(), e.rank)).collect()
    }

    pub fn has_ties(&self) -> bool {
        self.entries.windows(2).any(|w| w[0].rank == w[1].rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(list: &RankedList) -> Vec<(&str, u32)> {
        list.entries().iter().map(|e| (e.tag.as_str(), e.rank)).collect()
    }

    #[test]
    fn tags_are_normalized() {
        assert_eq!(Tag::new("  Rust ").unwrap().as_str(), "rust");
        assert!(matches!(Tag::new("   "), Err(Error::InvalidTag(_))));
    }

    #[test]
    fn snapshot_counts_prefix() {
        let s = TagStream::from_tags("r", ["a", "b", "a"]).unwrap();
        let full = s.snapshot(3).unwrap();
        assert_eq!(full.prefix_len(), 3);
        assert_eq!(full.counts().get("a"), Some(&2));
        assert_eq!(full.counts().get("b"), Some(&1));
        let first = s.snapshot(1).unwrap();
        assert_eq!(first.counts().len(), 1);
        assert_eq!(first.counts().get("a"), Some(&1));
    }

    #[test]
    fn snapshot_out_of_range() {
        let s = TagStream::from_tags("r", ["a"]).unwrap();
        assert!(matches!(s.snapshot(2), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.snapshot(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn competition_ranking() {
        let snap = FrequencySnapshot::from_counts("r", [("a", 5), ("c", 3), ("b", 3), ("d", 1)]).unwrap();
        assert_eq!(ranks(&snap.rank().unwrap()), vec![("a", 1), ("b", 2), ("c", 2), ("d", 4)]);

        let flat = FrequencySnapshot::from_counts("r", [("a", 1), ("b", 1), ("c", 1), ("d", 1)]).unwrap();
        assert!(flat.rank().unwrap().entries().iter().all(|e| e.rank == 1));

        let single = FrequencySnapshot::from_counts("r", [("x", 7)]).unwrap();
        assert_eq!(ranks(&single.rank().unwrap()), vec![("x", 1)]);
    }

    #[test]
    fn empty_snapshot_cannot_rank() {
        let empty = FrequencySnapshot::from_counts::<_, &str>("r", []).unwrap();
        assert!(matches!(empty.rank(), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn from_ranks_validates_competition_ranking() {
        assert!(RankedList::from_ranks([("a", 1), ("b", 1), ("c", 1), ("d", 4)]).is_ok());
        assert!(RankedList::from_ranks([("a", 1), ("b", 1), ("c", 2)]).is_err());
        assert!(RankedList::from_ranks([("a", 1), ("a", 2)]).is_err());
    }

    #[test]
    fn proportions_at_checkpoints() {
        let s = TagStream::from_tags("r", ["a", "a", "b", "a"]).unwrap();
        let traj = s.proportion_trajectory(2).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj[0].t, 2);
        assert_eq!(traj[0].proportions.get("a"), Some(&1.0));
        assert_eq!(traj[0].proportions.len(), 1);
        assert_eq!(traj[1].t, 4);
        assert_eq!(traj[1].proportions.get("a"), Some(&0.75));
        assert_eq!(traj[1].proportions.get("b"), Some(&0.25));
    }

    #[test]
    fn proportions_of_constant_stream() {
        let s = TagStream::from_tags("r", vec!["x"; 50]).unwrap();
        for p in s.proportion_trajectory(7).unwrap() {
            assert_eq!(p.proportions.get("x"), Some(&1.0));
        }
    }

    #[test]
    fn proportions_reject_empty_and_zero_window() {
        let empty = TagStream::from_tags::<_, &str>("r", []).unwrap();
        assert!(matches!(empty.proportion_trajectory(1), Err(Error::EmptyInput(_))));
        let s = TagStream::from_tags("r", ["a"]).unwrap();
        assert!(s.proportion_trajectory(0).is_err());
    }

    #[test]
    fn assignments_must_be_contiguous() {
        let mk = |seq| TagAssignment {
            resource_id: "r".into(),
            tag: Tag::new("a").unwrap(),
            seq,
            user_id: None,
        };
        assert!(TagStream::from_assignments("r", vec![mk(1), mk(2)]).is_ok());
        assert!(TagStream::from_assignments("r", vec![mk(1), mk(3)]).is_err());
        assert!(TagStream::from_assignments("q", vec![mk(1)]).is_err());
    }
}
