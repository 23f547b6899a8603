//! Hierarchical training corpora: subsets of instruction/response examples,
//! optionally partitioned into difficulty groups.
//!
//! A [`MixtureCorpus`] holds `N` ordered subsets over one shared token
//! vocabulary. Each subset is an ordered list of groups; a freshly generated
//! corpus has a single anonymous group per subset, and
//! [`partition_by_difficulty`](difficulty::partition_by_difficulty) rebuilds
//! it with `K` groups per subset sorted easiest to hardest. The two-level
//! `(subset, group)` shape is exactly the shape the two actor levels sample
//! over.
//!
//! Token ids are plain integers in `[0, vocab_size)`. Difficulty scores and
//! group ids are `None` until a partition assigns them.

pub mod difficulty;
pub mod generate;
pub mod io;
pub mod sampling;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One instruction/response example.
///
/// Field order is the serialization order of the corpus file format and must
/// not change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    /// Index of the subset this example belongs to.
    pub subset_id: usize,
    /// Difficulty-group index within the subset; `None` before partitioning.
    pub group_id: Option<usize>,
    /// Difficulty score assigned by the partition; `None` before partitioning.
    pub difficulty: Option<f64>,
    /// Instruction (conditioning prefix), at least one token.
    pub instruction: Vec<u32>,
    /// Response (scored continuation), at least one token.
    pub response: Vec<u32>,
}

impl ExampleRecord {
    /// Ungrouped example.
    pub fn new(subset_id: usize, instruction: Vec<u32>, response: Vec<u32>) -> Self {
        ExampleRecord {
            subset_id,
            group_id: None,
            difficulty: None,
            instruction,
            response,
        }
    }

    fn validate(&self, vocab_size: usize) -> Result<()> {
        if self.instruction.is_empty() {
            return Err(Error::InvalidExample("empty instruction".into()));
        }
        if self.response.is_empty() {
            return Err(Error::InvalidExample("empty response".into()));
        }
        for &t in self.instruction.iter().chain(&self.response) {
            if t as usize >= vocab_size {
                return Err(Error::InvalidExample(format!(
                    "token {t} outside vocabulary of size {vocab_size}"
                )));
            }
        }
        if let Some(d) = self.difficulty {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidExample(format!(
                    "difficulty must be finite and non-negative, got {d}"
                )));
            }
        }
        Ok(())
    }
}

/// One subset: an ordered list of groups of examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    groups: Vec<Vec<ExampleRecord>>,
}

impl Subset {
    /// Total number of examples across groups.
    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Group sizes in group order.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// The groups themselves, in group order.
    pub fn groups(&self) -> &[Vec<ExampleRecord>] {
        &self.groups
    }

    /// All examples in the subset in group-major order.
    pub fn iter(&self) -> impl Iterator<Item = &ExampleRecord> {
        self.groups.iter().flatten()
    }
}

/// A corpus of `N` subsets over one shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureCorpus {
    vocab_size: usize,
    subsets: Vec<Subset>,
}

impl MixtureCorpus {
    /// Builds an unpartitioned corpus (one anonymous group per subset).
    ///
    /// Records must carry the subset id matching their position and no group
    /// assignment.
    pub fn from_examples(
        vocab_size: usize,
        per_subset: Vec<Vec<ExampleRecord>>,
    ) -> Result<Self> {
        let subsets = per_subset
            .into_iter()
            .map(|examples| Subset {
                groups: vec![examples],
            })
            .collect();
        let corpus = MixtureCorpus {
            vocab_size,
            subsets,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Builds a partitioned corpus from explicit groups per subset.
    pub fn from_groups(
        vocab_size: usize,
        per_subset: Vec<Vec<Vec<ExampleRecord>>>,
    ) -> Result<Self> {
        let subsets = per_subset
            .into_iter()
            .map(|groups| Subset { groups })
            .collect();
        let corpus = MixtureCorpus {
            vocab_size,
            subsets,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Shared vocabulary size.
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Number of subsets.
    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    /// Example counts per subset.
    pub fn subset_sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Subset::len).collect()
    }

    /// Total number of examples.
    pub fn total_examples(&self) -> usize {
        self.subsets.iter().map(Subset::len).sum()
    }

    pub fn subset(&self, i: usize) -> Result<&Subset> {
        self.subsets
            .get(i)
            .ok_or_else(|| Error::InvalidIndex(format!("subset {i} of {}", self.subsets.len())))
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    /// Examples of group `j` in subset `i`.
    pub fn group(&self, i: usize, j: usize) -> Result<&[ExampleRecord]> {
        let subset = self.subset(i)?;
        subset
            .groups
            .get(j)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::InvalidIndex(format!(
                    "group {j} of {} in subset {i}",
                    subset.groups.len()
                ))
            })
    }

    /// Uniform group count if the corpus is partitioned, `None` otherwise.
    pub fn group_count(&self) -> Option<usize> {
        let first = self.subsets.first()?;
        let assigned = first
            .groups
            .first()
            .and_then(|g| g.first())
            .map(|e| e.group_id.is_some())
            .unwrap_or(false);
        if assigned {
            Some(first.groups.len())
        } else {
            None
        }
    }

    /// True once every example carries a group assignment.
    pub fn is_partitioned(&self) -> bool {
        self.group_count().is_some()
    }

    /// All examples in subset-major, group-major order. This is the order
    /// difficulty scores align to and the order of the serialized file.
    pub fn iter_all(&self) -> impl Iterator<Item = &ExampleRecord> {
        self.subsets.iter().flat_map(Subset::iter)
    }

    fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "vocabulary must have at least 2 tokens, got {}",
                self.vocab_size
            )));
        }
        if self.subsets.is_empty() {
            return Err(Error::InvalidConfig("corpus has no subsets".into()));
        }
        let grouped = self.subsets[0]
            .groups
            .first()
            .and_then(|g| g.first())
            .map(|e| e.group_id.is_some())
            .unwrap_or(false);
        let group_count = self.subsets[0].groups.len();
        for (i, subset) in self.subsets.iter().enumerate() {
            if subset.len() == 0 {
                return Err(Error::InvalidConfig(format!("subset {i} is empty")));
            }
            if grouped && subset.groups.len() != group_count {
                return Err(Error::InvalidConfig(format!(
                    "subset {i} has {} groups, expected {group_count}",
                    subset.groups.len()
                )));
            }
            if !grouped && subset.groups.len() != 1 {
                return Err(Error::InvalidConfig(format!(
                    "unpartitioned subset {i} must hold a single group"
                )));
            }
            let mut prev_group_max: Option<f64> = None;
            for (j, group) in subset.groups.iter().enumerate() {
                if grouped && group.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "group {j} of subset {i} is empty"
                    )));
                }
                for e in group {
                    e.validate(self.vocab_size)?;
                    if e.subset_id != i {
                        return Err(Error::InvalidExample(format!(
                            "example in subset {i} labeled subset {}",
                            e.subset_id
                        )));
                    }
                    match (grouped, e.group_id) {
                        (true, Some(g)) if g == j => {}
                        (false, None) => {}
                        (true, got) => {
                            return Err(Error::InvalidExample(format!(
                                "example in group {j} of subset {i} labeled group {got:?}"
                            )));
                        }
                        (false, Some(_)) => {
                            return Err(Error::InvalidExample(format!(
                                "unpartitioned subset {i} holds a grouped example"
                            )));
                        }
                    }
                    if grouped && e.difficulty.is_none() {
                        return Err(Error::InvalidExample(format!(
                            "grouped example in subset {i} lacks a difficulty score"
                        )));
                    }
                }
                // Groups must be ordered easiest to hardest: the hardest
                // example of group j may not exceed the easiest of group j+1.
                if grouped {
                    let lo = group
                        .iter()
                        .filter_map(|e| e.difficulty)
                        .fold(f64::INFINITY, f64::min);
                    let hi = group
                        .iter()
                        .filter_map(|e| e.difficulty)
                        .fold(f64::NEG_INFINITY, f64::max);
                    if let Some(prev) = prev_group_max {
                        if lo < prev {
                            return Err(Error::InvalidState(format!(
                                "groups of subset {i} are not ordered by difficulty \
                                 ({lo} after {prev})"
                            )));
                        }
                    }
                    prev_group_max = Some(hi);
                }
            }
        }
        Ok(())
    }
}
