//! Synthetic instruction/response corpora with controllable difficulty.
//!
//! Two generators share one vocabulary:
//!
//! * `markov-chain`: the token ring is sliced into one region per subset,
//!   and each region splits into two disjoint segments, a primary one and
//!   an alternate one, each with its own preferred-transition table. No
//!   two segments anywhere share a token, so progress on one never
//!   disturbs predictions on another. Every example walks exactly one
//!   segment: with probability `hard_fraction` it walks the alternate
//!   segment, otherwise the primary one. Alternate examples are rarer by
//!   construction, so their transition statistics stay undertrained unless
//!   sampling deliberately favors them, yet they are exactly as learnable
//!   as primary ones; that makes them "hard" in the sense difficulty
//!   scoring detects, and rewarding to train on once exposed.
//!   `transition_entropy` mixes every transition with a uniform draw over
//!   the segment and therefore sets the subset's irreducible noise floor.
//! * `template-grammar`: instructions are slot-fillings from a token pool,
//!   responses rearrange the slots through a per-subset substitution
//!   table. With probability `hard_fraction` an example's response tokens
//!   are independently corrupted half the time, weakening what the
//!   instruction reveals about the response.
//!
//! The instruction is a genuine prefix of the process that produces the
//! response, so conditioning on it helps a (partially) trained model, which
//! is what difficulty scoring relies on.

use super::{ExampleRecord, MixtureCorpus};
use crate::error::{Error, Result};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    MarkovChain,
    TemplateGrammar,
}

fn default_instruction_len() -> (usize, usize) {
    (3, 6)
}

fn default_response_len() -> (usize, usize) {
    (6, 12)
}

/// Recipe for one subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub generator: GeneratorKind,
    /// Uniform-mixing weight of every transition, in (0, 1]. Sets the
    /// subset's irreducible difficulty.
    pub transition_entropy: f64,
    /// Number of examples.
    pub size: usize,
    /// Probability that an example is a hard one, in [0, 1].
    pub hard_fraction: f64,
    /// Inclusive instruction length range (markov-chain generator).
    #[serde(default = "default_instruction_len")]
    pub instruction_len: (usize, usize),
    /// Inclusive response length range (markov-chain generator).
    #[serde(default = "default_response_len")]
    pub response_len: (usize, usize),
}

impl SubsetSpec {
    /// Markov-chain spec with default length ranges.
    pub fn markov(transition_entropy: f64, size: usize, hard_fraction: f64) -> Self {
        SubsetSpec {
            generator: GeneratorKind::MarkovChain,
            transition_entropy,
            size,
            hard_fraction,
            instruction_len: default_instruction_len(),
            response_len: default_response_len(),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let loc = format!("subset spec {index}");
        if self.size == 0 {
            return Err(Error::InvalidConfig(format!("{loc}: size must be at least 1")));
        }
        if !self.transition_entropy.is_finite()
            || self.transition_entropy <= 0.0
            || self.transition_entropy > 1.0
        {
            return Err(Error::InvalidConfig(format!(
                "{loc}: transition_entropy must lie in (0, 1], got {}",
                self.transition_entropy
            )));
        }
        if !self.hard_fraction.is_finite()
            || !(0.0..=1.0).contains(&self.hard_fraction)
        {
            return Err(Error::InvalidConfig(format!(
                "{loc}: hard_fraction must lie in [0, 1], got {}",
                self.hard_fraction
            )));
        }
        for (name, (lo, hi)) in [
            ("instruction_len", self.instruction_len),
            ("response_len", self.response_len),
        ] {
            if lo == 0 || hi < lo {
                return Err(Error::InvalidConfig(format!(
                    "{loc}: {name} range ({lo}, {hi}) must satisfy 1 <= lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// Generates the full mixture. One corpus seed determines every token;
/// identical specs and seed reproduce the corpus exactly.
pub fn generate_synthetic_mixture(
    specs: &[SubsetSpec],
    vocab_size: usize,
    seed: u64,
) -> Result<MixtureCorpus> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no subset specs given".into()));
    }
    if vocab_size < 2 {
        return Err(Error::InvalidConfig(format!(
            "vocab_size must be at least 2, got {vocab_size}"
        )));
    }
    for (i, spec) in specs.iter().enumerate() {
        spec.validate(i)?;
    }
    let markov_present = specs
        .iter()
        .any(|s| s.generator == GeneratorKind::MarkovChain);
    if markov_present && vocab_size < 2 * specs.len() {
        return Err(Error::InvalidConfig(format!(
            "vocab_size {vocab_size} cannot host {} markov subsets; each needs \
             a ring region of at least 2 tokens",
            specs.len()
        )));
    }
    let mut r = rng::stream(seed, rng::STREAM_CORPUS);
    let n = specs.len();
    let per_subset = specs
        .iter()
        .enumerate()
        .map(|(i, spec)| match spec.generator {
            GeneratorKind::MarkovChain => generate_markov(i, n, spec, vocab_size, &mut r),
            GeneratorKind::TemplateGrammar => generate_grammar(i, spec, vocab_size, &mut r),
        })
        .collect();
    MixtureCorpus::from_examples(vocab_size, per_subset)
}

/// One segment of the token ring with its preferred-transition table.
struct Segment {
    tokens: Vec<u32>,
    /// Preferred successor, indexed by position within `tokens`.
    preferred: Vec<u32>,
}

impl Segment {
    fn new(start: usize, len: usize, vocab: usize, r: &mut impl Rng) -> Self {
        let tokens: Vec<u32> = (0..len).map(|k| ((start + k) % vocab) as u32).collect();
        let preferred = (0..len).map(|_| tokens[r.random_range(0..len)]).collect();
        Segment { tokens, preferred }
    }

    fn walk(
        &self,
        ilen: usize,
        rlen: usize,
        entropy: f64,
        r: &mut impl Rng,
    ) -> (Vec<u32>, Vec<u32>) {
        let total = ilen + rlen;
        let mut tokens = Vec::with_capacity(total);
        tokens.push(self.tokens[r.random_range(0..self.tokens.len())]);
        for pos in 1..total {
            let prev = tokens[pos - 1];
            let idx = self
                .tokens
                .iter()
                .position(|&t| t == prev)
                .expect("walk stays inside its segment");
            let tok = if r.random::<f64>() < entropy {
                self.tokens[r.random_range(0..self.tokens.len())]
            } else {
                self.preferred[idx]
            };
            tokens.push(tok);
        }
        let response = tokens.split_off(ilen);
        (tokens, response)
    }
}

fn generate_markov(
    subset_id: usize,
    subset_count: usize,
    spec: &SubsetSpec,
    vocab: usize,
    r: &mut impl Rng,
) -> Vec<ExampleRecord> {
    // The subset's region of the token ring: first half hosts primary
    // examples, the second half alternate ones.
    let region_start = subset_id * vocab / subset_count;
    let region_len = (subset_id + 1) * vocab / subset_count - region_start;
    let half = region_len / 2;
    let primary = Segment::new(region_start, half, vocab, r);
    let alternate = Segment::new(region_start + half, region_len - half, vocab, r);

    (0..spec.size)
        .map(|_| {
            let is_hard = r.random::<f64>() < spec.hard_fraction;
            let ilen = r.random_range(spec.instruction_len.0..=spec.instruction_len.1);
            let rlen = r.random_range(spec.response_len.0..=spec.response_len.1);
            let segment = if is_hard { &alternate } else { &primary };
            let (instruction, response) =
                segment.walk(ilen, rlen, spec.transition_entropy, r);
            ExampleRecord::new(subset_id, instruction, response)
        })
        .collect()
}

/// Fixed template shapes: instruction slot count and the response as a
/// pattern of slot indices.
const GRAMMAR_SHAPES: &[(usize, &[usize])] = &[
    (3, &[2, 1, 0, 2]),
    (2, &[1, 0, 1, 0]),
    (4, &[3, 2, 1, 0]),
    (3, &[0, 0, 1, 2, 2]),
];

fn generate_grammar(
    subset_id: usize,
    spec: &SubsetSpec,
    vocab: usize,
    r: &mut impl Rng,
) -> Vec<ExampleRecord> {
    // Pool breadth scales with entropy; pools of different subsets start at
    // different offsets so subsets remain distinguishable.
    let pool_size = ((spec.transition_entropy * vocab as f64).round() as usize)
        .clamp(2, vocab);
    let start = (subset_id * 13) % vocab;
    let pool: Vec<u32> = (0..pool_size)
        .map(|i| ((start + i) % vocab) as u32)
        .collect();
    // Per-subset substitution applied to every response slot.
    let substitution: Vec<u32> = {
        let mut perm: Vec<u32> = pool.clone();
        for i in (1..perm.len()).rev() {
            let j = r.random_range(0..=i);
            perm.swap(i, j);
        }
        perm
    };
    let pool_index = |tok: u32| pool.iter().position(|&p| p == tok).expect("token from pool");

    (0..spec.size)
        .map(|_| {
            let is_hard = r.random::<f64>() < spec.hard_fraction;
            let corruption = if is_hard { 0.5 } else { 0.0 };
            let (slots, pattern) = GRAMMAR_SHAPES[r.random_range(0..GRAMMAR_SHAPES.len())];
            let instruction: Vec<u32> = (0..slots)
                .map(|_| pool[r.random_range(0..pool.len())])
                .collect();
            let response: Vec<u32> = pattern
                .iter()
                .map(|&slot| {
                    let mapped = substitution[pool_index(instruction[slot])];
                    if r.random::<f64>() < corruption {
                        pool[r.random_range(0..pool.len())]
                    } else {
                        mapped
                    }
                })
                .collect();
            ExampleRecord::new(subset_id, instruction, response)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> Vec<SubsetSpec> {
        vec![
            SubsetSpec::markov(0.2, 40, 0.5),
            SubsetSpec {
                generator: GeneratorKind::TemplateGrammar,
                transition_entropy: 0.8,
                size: 25,
                hard_fraction: 0.3,
                instruction_len: default_instruction_len(),
                response_len: default_response_len(),
            },
        ]
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic_mixture(&specs(), 16, 7).unwrap();
        let b = generate_synthetic_mixture(&specs(), 16, 7).unwrap();
        let c = generate_synthetic_mixture(&specs(), 16, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sizes_and_ids_match_specs() {
        let corpus = generate_synthetic_mixture(&specs(), 16, 3).unwrap();
        assert_eq!(corpus.subset_sizes(), vec![40, 25]);
        assert!(!corpus.is_partitioned());
        for (i, subset) in corpus.subsets().iter().enumerate() {
            for e in subset.iter() {
                assert_eq!(e.subset_id, i);
                assert!(e.group_id.is_none());
            }
        }
    }

    #[test]
    fn tokens_stay_inside_vocabulary() {
        let corpus = generate_synthetic_mixture(&specs(), 8, 11).unwrap();
        for e in corpus.iter_all() {
            for &t in e.instruction.iter().chain(&e.response) {
                assert!((t as usize) < 8);
            }
        }
    }

    #[test]
    fn markov_lengths_respect_ranges() {
        let spec = SubsetSpec {
            instruction_len: (2, 4),
            response_len: (5, 7),
            ..SubsetSpec::markov(0.5, 60, 0.0)
        };
        let corpus = generate_synthetic_mixture(&[spec], 8, 1).unwrap();
        for e in corpus.iter_all() {
            assert!((2..=4).contains(&e.instruction.len()));
            assert!((5..=7).contains(&e.response.len()));
        }
    }

    #[test]
    fn low_entropy_chains_repeat_their_preferred_transitions() {
        // With entropy 0.05 and no hard examples, every walk follows one
        // deterministic half-ring table, so a handful of (prev -> next)
        // pairs dominates.
        let spec = SubsetSpec {
            response_len: (30, 30),
            ..SubsetSpec::markov(0.05, 50, 0.0)
        };
        let corpus = generate_synthetic_mixture(&[spec], 12, 5).unwrap();
        let mut pair_counts = std::collections::HashMap::new();
        for e in corpus.iter_all() {
            let seq: Vec<u32> = e.instruction.iter().chain(&e.response).copied().collect();
            for w in seq.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_insert(0usize) += 1;
            }
        }
        let total: usize = pair_counts.values().sum();
        let mut counts: Vec<usize> = pair_counts.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let top: usize = counts.iter().take(12).sum();
        assert!(
            top as f64 > 0.8 * total as f64,
            "dominant transitions cover only {top}/{total}"
        );
    }

    #[test]
    fn subsets_use_disjoint_token_regions() {
        let specs = vec![
            SubsetSpec::markov(0.3, 50, 0.5),
            SubsetSpec::markov(0.5, 50, 0.5),
            SubsetSpec::markov(0.7, 50, 0.5),
        ];
        let corpus = generate_synthetic_mixture(&specs, 32, 17).unwrap();
        let sets: Vec<std::collections::HashSet<u32>> = corpus
            .subsets()
            .iter()
            .map(|s| {
                s.iter()
                    .flat_map(|e| e.instruction.iter().chain(&e.response).copied())
                    .collect()
            })
            .collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                assert!(sets[i].is_disjoint(&sets[j]), "subsets {i} and {j} overlap");
            }
        }
    }

    #[test]
    fn hard_and_easy_examples_use_disjoint_tokens() {
        // hard_fraction 1 walks only the alternate segment; 0 only the
        // primary one. The two token sets must never overlap.
        let all_hard = generate_synthetic_mixture(&[SubsetSpec::markov(0.3, 60, 1.0)], 16, 9)
            .unwrap();
        let all_easy = generate_synthetic_mixture(&[SubsetSpec::markov(0.3, 60, 0.0)], 16, 9)
            .unwrap();
        let collect = |c: &MixtureCorpus| {
            c.iter_all()
                .flat_map(|e| e.instruction.iter().chain(&e.response).copied())
                .collect::<std::collections::HashSet<u32>>()
        };
        let hard_tokens = collect(&all_hard);
        let easy_tokens = collect(&all_easy);
        assert!(!hard_tokens.is_empty() && !easy_tokens.is_empty());
        assert!(hard_tokens.is_disjoint(&easy_tokens));
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad_entropy = SubsetSpec {
            transition_entropy: 0.0,
            ..SubsetSpec::markov(0.5, 10, 0.0)
        };
        assert!(generate_synthetic_mixture(&[bad_entropy], 8, 0).is_err());
        let bad_size = SubsetSpec {
            size: 0,
            ..SubsetSpec::markov(0.5, 10, 0.0)
        };
        assert!(generate_synthetic_mixture(&[bad_size], 8, 0).is_err());
        for bad in [-0.1, 1.5, f64::NAN] {
            let bad_fraction = SubsetSpec {
                hard_fraction: bad,
                ..SubsetSpec::markov(0.5, 10, 0.0)
            };
            assert!(generate_synthetic_mixture(&[bad_fraction], 8, 0).is_err());
        }
        assert!(generate_synthetic_mixture(&[], 8, 0).is_err());
        assert!(generate_synthetic_mixture(&[SubsetSpec::markov(0.5, 10, 0.0)], 1, 0).is_err());
        // Three markov subsets need at least six tokens.
        let three = vec![
            SubsetSpec::markov(0.5, 10, 0.0),
            SubsetSpec::markov(0.5, 10, 0.0),
            SubsetSpec::markov(0.5, 10, 0.0),
        ];
        assert!(generate_synthetic_mixture(&three, 5, 0).is_err());
        assert!(generate_synthetic_mixture(&three, 6, 0).is_ok());
    }
}
