//! Difficulty scoring and score-ordered grouping.
//!
//! The default metric is the instruction-following-difficulty ratio
//! `PPL(response | instruction) / PPL(response)`, where the unconditional
//! term re-evaluates the response with the instruction positions replaced by
//! padding. A helpful instruction drives the ratio below 1; a ratio near 1
//! means conditioning buys nothing, and above 1 the instruction actively
//! confuses the model. Partitioning sorts each subset by ascending score and
//! slices it into contiguous groups whose sizes differ by at most one, so
//! group 0 always holds the easiest examples.

use super::{ExampleRecord, MixtureCorpus};
use crate::error::{Error, Result};
use crate::model::ToyLanguageModel;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifficultyMetric {
    /// Conditional over unconditional response perplexity.
    #[default]
    Ifd,
    /// Conditional response perplexity.
    Ppl,
    /// Mean conditional token loss.
    Loss,
}

/// `PPL(response | instruction) / PPL(response)` under one model.
pub fn ifd_score<S: Scalar>(model: &ToyLanguageModel<S>, example: &ExampleRecord) -> Result<f64> {
    let conditional = model.example_nll(example, false)?.to_f64_lossy();
    let unconditional = model.example_nll(example, true)?.to_f64_lossy();
    // Both are mean NLLs over the same response positions, so the perplexity
    // ratio collapses to one exp. PPL(response) >= 1 keeps this finite.
    Ok((conditional - unconditional).exp())
}

/// Scores every example, in subset-major then group-major order (the order
/// `MixtureCorpus::iter_all` walks).
pub fn score_examples<S: Scalar>(
    model: &ToyLanguageModel<S>,
    corpus: &MixtureCorpus,
    metric: DifficultyMetric,
) -> Result<Vec<f64>> {
    corpus
        .iter_all()
        .map(|e| match metric {
            DifficultyMetric::Ifd => ifd_score(model, e),
            DifficultyMetric::Ppl => model.perplexity(e).map(|p| p.to_f64_lossy()),
            DifficultyMetric::Loss => model.example_nll(e, false).map(|l| l.to_f64_lossy()),
        })
        .collect()
}

/// Regroups every subset into `group_count` difficulty-sorted groups.
///
/// `scores` must align with `corpus.iter_all()`. Sizes of the groups of an
/// n-example subset differ by at most one (the first `n % group_count`
/// groups take the extra example). The sort is stable, so equal scores keep
/// their original relative order.
pub fn partition_by_difficulty(
    corpus: &MixtureCorpus,
    scores: &[f64],
    group_count: usize,
) -> Result<MixtureCorpus> {
    if group_count == 0 {
        return Err(Error::InvalidConfig("group_count must be at least 1".into()));
    }
    if scores.len() != corpus.total_examples() {
        return Err(Error::Contract(format!(
            "{} scores for {} examples",
            scores.len(),
            corpus.total_examples()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::InvalidState(format!(
            "difficulty scores must be finite and non-negative, got {bad}"
        )));
    }

    let mut offset = 0usize;
    let mut subsets = Vec::with_capacity(corpus.subset_count());
    for subset in corpus.subsets() {
        let n = subset.len();
        if n < group_count {
            return Err(Error::InvalidConfig(format!(
                "subset with {n} examples cannot form {group_count} groups"
            )));
        }
        let mut scored: Vec<(&ExampleRecord, f64)> = subset
            .iter()
            .zip(&scores[offset..offset + n])
            .map(|(e, &s)| (e, s))
            .collect();
        offset += n;
        scored.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"));

        let base = n / group_count;
        let extra = n % group_count;
        let mut groups = Vec::with_capacity(group_count);
        let mut cursor = 0usize;
        for g in 0..group_count {
            let len = base + usize::from(g < extra);
            let members = scored[cursor..cursor + len]
                .iter()
                .map(|(e, s)| {
                    let mut out = (*e).clone();
                    out.group_id = Some(g);
                    out.difficulty = Some(*s);
                    out
                })
                .collect();
            groups.push(members);
            cursor += len;
        }
        subsets.push(groups);
    }
    MixtureCorpus::from_groups(corpus.vocab_size(), subsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, Parameters, ToyLanguageModel};
    use approx::assert_relative_eq;

    fn flat_corpus(vocab: usize, sizes: &[usize]) -> MixtureCorpus {
        let subsets = sizes
            .iter()
            .enumerate()
            .map(|(sid, &n)| {
                (0..n)
                    .map(|k| {
                        ExampleRecord::new(
                            sid,
                            vec![(k % vocab) as u32],
                            vec![((k + 1) % vocab) as u32, (k % vocab) as u32],
                        )
                    })
                    .collect()
            })
            .collect();
        MixtureCorpus::from_examples(vocab, subsets).unwrap()
    }

    /// Tiny model where the instruction halves the response surprisal:
    /// conditioned contexts emit probability 1/2 for the true token,
    /// instruction-masked contexts emit 1/4.
    fn helpful_instruction_model() -> ToyLanguageModel<f64> {
        let cfg = ModelConfig {
            vocab_size: 2,
            context_window: 2,
            embed_dim: 2,
            hidden_dim: 1,
            init_scale: 0.1,
        };
        let ln3 = 3f64.ln();
        let params = Parameters {
            embed: vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            w1: vec![1.0, 0.0, 1.0, 0.0],
            b1: vec![0.0],
            w2: vec![0.0, ln3 / 1f64.tanh()],
            b2: vec![0.0, -ln3],
        };
        ToyLanguageModel::from_parts(cfg, params).unwrap()
    }

    #[test]
    fn helpful_instruction_scores_one_half() {
        let model = helpful_instruction_model();
        let e = ExampleRecord::new(0, vec![0], vec![1, 1]);
        // Conditioned: both response tokens sit at probability 1/2, so the
        // conditional perplexity is 2; masked contexts give 1/4 and
        // perplexity 4.
        let score = ifd_score(&model, &e).unwrap();
        assert_relative_eq!(score, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn context_blind_model_scores_exactly_one() {
        // All-zero weights emit the same distribution whatever the context,
        // so masking the instruction changes nothing.
        let cfg = ModelConfig::default();
        let zeros = Parameters::zeros(&cfg);
        let model = ToyLanguageModel::<f64>::from_parts(cfg, zeros).unwrap();
        let e = ExampleRecord::new(0, vec![1, 2, 3], vec![4, 5]);
        assert_eq!(ifd_score(&model, &e).unwrap(), 1.0);
    }

    #[test]
    fn score_order_matches_iteration_order() {
        let corpus = flat_corpus(8, &[5, 3]);
        let model = ToyLanguageModel::<f64>::init(
            ModelConfig {
                vocab_size: 8,
                ..ModelConfig::default()
            },
            3,
        )
        .unwrap();
        let scores = score_examples(&model, &corpus, DifficultyMetric::Loss).unwrap();
        assert_eq!(scores.len(), 8);
        for (e, s) in corpus.iter_all().zip(&scores) {
            assert_relative_eq!(
                model.example_nll(e, false).unwrap(),
                *s,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn loss_is_log_of_ppl() {
        let corpus = flat_corpus(8, &[4]);
        let model = ToyLanguageModel::<f64>::init(
            ModelConfig {
                vocab_size: 8,
                ..ModelConfig::default()
            },
            9,
        )
        .unwrap();
        let loss = score_examples(&model, &corpus, DifficultyMetric::Loss).unwrap();
        let ppl = score_examples(&model, &corpus, DifficultyMetric::Ppl).unwrap();
        for (l, p) in loss.iter().zip(&ppl) {
            assert_relative_eq!(l.exp(), *p, max_relative = 1e-12);
        }
    }

    #[test]
    fn partition_sizes_are_balanced() {
        // Independent route to the same sizes: hand out one slot per group
        // round-robin, then count.
        let corpus = flat_corpus(4, &[10, 7]);
        let scores: Vec<f64> = (0..17).map(|i| i as f64).collect();
        let grouped = partition_by_difficulty(&corpus, &scores, 4).unwrap();
        for (subset, n) in grouped.subsets().iter().zip([10usize, 7]) {
            let mut oracle = vec![0usize; 4];
            for slot in 0..n {
                oracle[slot % 4] += 1;
            }
            assert_eq!(subset.group_sizes(), oracle);
        }
        assert_eq!(grouped.subsets()[0].group_sizes(), vec![3, 3, 2, 2]);
    }

    #[test]
    fn groups_are_sorted_and_group_zero_is_easiest() {
        let corpus = flat_corpus(4, &[9]);
        // Deliberately unsorted scores.
        let scores = vec![5.0, 1.0, 4.0, 8.0, 0.5, 2.0, 9.0, 3.0, 7.0];
        let grouped = partition_by_difficulty(&corpus, &scores, 3).unwrap();
        let subset = &grouped.subsets()[0];
        let mut previous = f64::NEG_INFINITY;
        for (g, group) in subset.groups().iter().enumerate() {
            for e in group {
                let d = e.difficulty.unwrap();
                assert!(d >= previous, "group {g} breaks ascending order");
                previous = d;
                assert_eq!(e.group_id, Some(g));
            }
        }
        let easiest: Vec<f64> = subset.groups()[0]
            .iter()
            .map(|e| e.difficulty.unwrap())
            .collect();
        assert_eq!(easiest, vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn partition_preserves_subset_membership() {
        let corpus = flat_corpus(4, &[6, 5]);
        let scores: Vec<f64> = (0..11).map(|i| ((i * 7) % 11) as f64).collect();
        let grouped = partition_by_difficulty(&corpus, &scores, 2).unwrap();
        for (before, after) in corpus.subsets().iter().zip(grouped.subsets()) {
            let key = |e: &ExampleRecord| (e.instruction.clone(), e.response.clone());
            let mut a: Vec<_> = before.iter().map(key).collect();
            let mut b: Vec<_> = after.iter().map(key).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn equal_scores_keep_original_order() {
        let corpus = flat_corpus(4, &[6]);
        let scores = vec![1.0; 6];
        let grouped = partition_by_difficulty(&corpus, &scores, 2).unwrap();
        let reordered: Vec<_> = grouped.iter_all().map(|e| e.instruction.clone()).collect();
        let original: Vec<_> = corpus.iter_all().map(|e| e.instruction.clone()).collect();
        assert_eq!(reordered, original);
    }

    #[test]
    fn single_group_keeps_everything_together() {
        let corpus = flat_corpus(4, &[5]);
        let scores = vec![3.0, 1.0, 2.0, 5.0, 4.0];
        let grouped = partition_by_difficulty(&corpus, &scores, 1).unwrap();
        assert_eq!(grouped.subsets()[0].group_sizes(), vec![5]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let corpus = flat_corpus(4, &[3]);
        assert!(partition_by_difficulty(&corpus, &[1.0, 2.0], 2).is_err());
        assert!(partition_by_difficulty(&corpus, &[1.0, 2.0, 3.0], 0).is_err());
        assert!(partition_by_difficulty(&corpus, &[1.0, 2.0, 3.0], 4).is_err());
        assert!(partition_by_difficulty(&corpus, &[1.0, f64::NAN, 3.0], 2).is_err());
        assert!(partition_by_difficulty(&corpus, &[1.0, -0.5, 3.0], 2).is_err());
    }
}
