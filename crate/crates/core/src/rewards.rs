//! Reward signals that drive the two actor levels.
//!
//! Global rewards rank whole subsets by how much the model still has to
//! learn from them: the gradient-norm reward is the L2 norm of the full
//! parameter gradient on a probe batch, and the alignment reward is the
//! cosine similarity between mean hidden states of two independent probe
//! batches from the same subset (coherent subsets keep pointing the same
//! way). Local rewards rank difficulty groups: the default is the mean
//! ratio of current to initial-snapshot perplexity, which starts at exactly
//! 1 and sinks fastest where the model is making real progress; raw mean
//! perplexity and mean loss are simpler alternatives.
//!
//! All rewards are pure functions of the model and probe batches; they
//! never mutate the model.

use crate::error::{Error, Result};
use crate::model::{Batch, ModelSnapshot, ToyLanguageModel};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Subset-level reward choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalRewardKind {
    /// L2 norm of the loss gradient over all model parameters.
    #[default]
    GradNorm,
    /// Cosine similarity of mean hidden states of two probe batches.
    CosSim,
}

/// Group-level reward choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalRewardKind {
    /// Mean per-example ratio of current perplexity to the perplexity under
    /// a frozen snapshot of the initial model.
    #[default]
    PplRatio,
    /// Mean per-example perplexity.
    MeanPpl,
    /// Mean per-example loss.
    MeanLoss,
}

/// `||grad L(batch)||_2` across every model parameter.
pub fn grad_norm_reward<S: Scalar>(model: &ToyLanguageModel<S>, batch: &Batch) -> Result<S> {
    model.grad_l2_norm(batch)
}

/// Cosine similarity between the mean hidden states of two probe batches.
pub fn cos_sim_reward<S: Scalar>(
    model: &ToyLanguageModel<S>,
    first: &Batch,
    second: &Batch,
) -> Result<S> {
    let a = model.hidden_state(first)?;
    let b = model.hidden_state(second)?;
    cosine_similarity(&a, &b)
}

/// `dot(a, b) / (|a| |b|)`; zero-norm inputs are degenerate because the
/// direction is undefined.
pub fn cosine_similarity<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "cosine similarity over mismatched lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = S::zero();
    let mut na = S::zero();
    let mut nb = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        na = na + x * x;
        nb = nb + y * y;
    }
    if na.is_zero() || nb.is_zero() {
        return Err(Error::DegenerateState(
            "cosine similarity of a zero-norm vector".into(),
        ));
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Mean over the batch of `PPL(y | x, current) / PPL(y | x, initial)`.
///
/// Perplexities never fall below 1, so the ratio is always finite; with
/// `current` still at the snapshot parameters it is exactly 1.
pub fn ppl_ratio_reward<S: Scalar>(
    model: &ToyLanguageModel<S>,
    initial: &ModelSnapshot<S>,
    batch: &Batch,
) -> Result<S> {
    if !initial.compatible_with(model.config()) {
        return Err(Error::InvalidState(
            "snapshot architecture does not match the current model".into(),
        ));
    }
    if batch.is_empty() {
        return Err(Error::InvalidBatch("empty batch".into()));
    }
    let mut total = S::zero();
    for e in batch.iter() {
        let now = model.perplexity(e)?;
        let then = initial.model().perplexity(e)?;
        total = total + now / then;
    }
    Ok(total / S::from_f64_lossy(batch.len() as f64))
}

/// Mean per-example perplexity.
pub fn mean_ppl_reward<S: Scalar>(model: &ToyLanguageModel<S>, batch: &Batch) -> Result<S> {
    if batch.is_empty() {
        return Err(Error::InvalidBatch("empty batch".into()));
    }
    let mut total = S::zero();
    for e in batch.iter() {
        total = total + model.perplexity(e)?;
    }
    Ok(total / S::from_f64_lossy(batch.len() as f64))
}

/// Mean per-example loss (mean of per-example mean NLLs).
pub fn mean_loss_reward<S: Scalar>(model: &ToyLanguageModel<S>, batch: &Batch) -> Result<S> {
    model.nll_loss(batch)
}

/// Dispatches a global reward. `second` feeds only the alignment reward,
/// which probes two independent batches.
pub fn global_reward<S: Scalar>(
    kind: GlobalRewardKind,
    model: &ToyLanguageModel<S>,
    first: &Batch,
    second: &Batch,
) -> Result<S> {
    match kind {
        GlobalRewardKind::GradNorm => grad_norm_reward(model, first),
        GlobalRewardKind::CosSim => cos_sim_reward(model, first, second),
    }
}

/// Dispatches a local reward.
pub fn local_reward<S: Scalar>(
    kind: LocalRewardKind,
    model: &ToyLanguageModel<S>,
    initial: &ModelSnapshot<S>,
    batch: &Batch,
) -> Result<S> {
    match kind {
        LocalRewardKind::PplRatio => ppl_ratio_reward(model, initial, batch),
        LocalRewardKind::MeanPpl => mean_ppl_reward(model, batch),
        LocalRewardKind::MeanLoss => mean_loss_reward(model, batch),
    }
}
