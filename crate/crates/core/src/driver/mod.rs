//! End-to-end runs: data preparation, the bilevel training loop, baselines,
//! ablations, and evaluation.
//!
//! A run goes through three phases. [`prepare`] withholds a held-out slice
//! of every subset, scores the remaining examples with a briefly warmed-up
//! copy of the initial model, optionally discards the easiest fraction, and
//! partitions each subset into difficulty groups. The engine then trains
//! the model for `steps` updates while the sampling policies route every
//! batch; depending on the mode the two policy levels are learned actors or
//! frozen distributions. Finally [`evaluate`] reports per-subset held-out
//! perplexity and loss plus their unweighted macro-averages.
//!
//! Modes:
//!
//! * `hbo`: global and local actors both learn.
//! * `global-only`: the global actor learns; local sampling is frozen at
//!   uniform over the groups of each subset.
//! * `local-only`: local actors learn; global sampling is frozen at the
//!   temperature prior over subset sizes.
//! * `static`: both levels frozen; the temperature prior picks the subset
//!   and the example is then uniform within it (groups carry no weight), so
//!   `temperature` 1 is proportional sampling, large values approach
//!   uniform-over-subsets.
//!
//! Setting an update period larger than the step count freezes that actor
//! entirely; otherwise an actor updates at every step index divisible by
//! its period, including step 0 (where local rewards are still close to 1
//! by construction). Paired comparisons should [`prepare`] once and run
//! each mode on the same prepared data with the same seeds: the runs then
//! share the initial model, grouping and held-out split exactly, and differ
//! only in scheduling.

mod artifacts;
mod engine;

pub use artifacts::{
    read_summary, read_trajectory, write_summary, write_trajectory, RunSummary, SummaryHeader,
    TrajectoryHeader, TrajectoryRecord,
};

use crate::actors::{ActorConfig, ActorNetwork};
use crate::error::{Error, Result};
use crate::mixture::difficulty::{partition_by_difficulty, score_examples, DifficultyMetric};
use crate::mixture::{ExampleRecord, MixtureCorpus};
use crate::model::optimizer::{OptimizerConfig, OptimizerState};
use crate::model::{Batch, ModelConfig, ToyLanguageModel};
use crate::rewards::{GlobalRewardKind, LocalRewardKind};
use crate::rng;
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which parts of the sampling hierarchy learn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Both actor levels learn.
    #[default]
    Hbo,
    /// Global actor learns, local sampling frozen at uniform over groups.
    GlobalOnly,
    /// Local actors learn, global sampling frozen at the temperature prior.
    LocalOnly,
    /// Both levels frozen: temperature prior over subsets, uniform inside.
    Static,
}

/// Root seeds for the independent random-number streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    /// Corpus generation.
    pub corpus: u64,
    /// Model init, actor init, difficulty-scorer warmup, and batch draws.
    pub train: u64,
    /// Reward probe batches.
    pub reward: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            corpus: 0,
            train: 0,
            reward: 0,
        }
    }
}

fn d_warmup_steps() -> usize {
    400
}
fn d_warmup_batch() -> usize {
    16
}

/// How difficulty scores are produced.
///
/// The scorer model starts from the exact initial training parameters and,
/// by default, takes a short warmup of uniformly sampled steps first: a
/// freshly initialized model is near-uniform and cannot yet tell easy from
/// hard, while a briefly trained copy spreads real signal across the score
/// range. `warmup_steps = 0` scores with the raw initial model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub metric: DifficultyMetric,
    pub warmup_steps: usize,
    pub warmup_batch_size: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            metric: DifficultyMetric::default(),
            warmup_steps: d_warmup_steps(),
            warmup_batch_size: d_warmup_batch(),
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_steps > 0 && self.warmup_batch_size == 0 {
            return Err(Error::InvalidConfig(
                "scorer warmup_batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Full run recipe. Every field has a default, so sparse configs work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: Mode,
    /// Model update steps `T` (before discard rescaling).
    pub steps: usize,
    /// Global actor update period; larger than the step count = frozen.
    pub global_period: usize,
    /// Local actor update period; larger than the step count = frozen.
    pub local_period: usize,
    /// Global actor learning rate.
    pub global_lr: f64,
    /// Local actor learning rate.
    pub local_lr: f64,
    /// Temperature of the size prior (init prior for learned global actors,
    /// the fixed subset distribution otherwise). `inf` means uniform.
    #[serde(with = "artifacts::extended_float")]
    pub temperature: f64,
    /// Difficulty groups per subset `K`.
    pub group_count: usize,
    /// Training batch size.
    pub batch_size: usize,
    /// Probe batch size for reward sweeps.
    pub reward_batch_size: usize,
    /// Fraction of the easiest-scored examples dropped from every subset;
    /// the step count is rescaled by `1/(1-fraction)` to hold total model
    /// updates fixed.
    pub discard_easiest_fraction: f64,
    /// Fraction of each subset withheld for evaluation before scoring.
    pub heldout_fraction: f64,
    /// Held-out evaluation period during training; 0 = final only.
    pub eval_every: usize,
    /// Trajectory record stride (records are also forced at actor updates).
    pub log_every: usize,
    /// Subtract the mean reward before actor updates.
    pub center_rewards: bool,
    /// Evaluate reward sweeps across threads (same results, fixed order).
    pub parallel_rewards: bool,
    pub global_reward: GlobalRewardKind,
    pub local_reward: LocalRewardKind,
    pub seeds: Seeds,
    pub optimizer: OptimizerConfig,
    pub actor: ActorConfig,
    pub scorer: ScorerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::default(),
            steps: 3000,
            global_period: 200,
            local_period: 200,
            global_lr: 1.0,
            local_lr: 2.0,
            temperature: 1.0,
            group_count: 4,
            batch_size: 16,
            reward_batch_size: 128,
            discard_easiest_fraction: 0.0,
            heldout_fraction: 0.1,
            eval_every: 0,
            log_every: 20,
            center_rewards: false,
            parallel_rewards: false,
            global_reward: GlobalRewardKind::default(),
            local_reward: LocalRewardKind::default(),
            seeds: Seeds::default(),
            optimizer: OptimizerConfig::default(),
            actor: ActorConfig::default(),
            scorer: ScorerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.global_period == 0 || self.local_period == 0 {
            return Err(Error::InvalidConfig(
                "actor update periods must be at least 1".into(),
            ));
        }
        for (name, lr) in [("global_lr", self.global_lr), ("local_lr", self.local_lr)] {
            if !lr.is_finite() || lr <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {lr}"
                )));
            }
        }
        if self.temperature <= 0.0 || self.temperature.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "temperature must be positive (inf allowed), got {}",
                self.temperature
            )));
        }
        if self.group_count == 0 {
            return Err(Error::InvalidConfig("group_count must be at least 1".into()));
        }
        if self.batch_size == 0 || self.reward_batch_size == 0 {
            return Err(Error::InvalidConfig("batch sizes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.discard_easiest_fraction) {
            return Err(Error::InvalidConfig(format!(
                "discard_easiest_fraction must lie in [0, 1), got {}",
                self.discard_easiest_fraction
            )));
        }
        if !(0.0..=0.5).contains(&self.heldout_fraction) {
            return Err(Error::InvalidConfig(format!(
                "heldout_fraction must lie in [0, 0.5], got {}",
                self.heldout_fraction
            )));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log_every must be at least 1".into()));
        }
        self.optimizer.validate()?;
        self.actor.validate()?;
        self.scorer.validate()?;
        Ok(())
    }

    /// Model update steps after discard rescaling: total compute is held
    /// fixed when a fraction of the data is dropped.
    pub fn effective_steps(&self) -> usize {
        if self.discard_easiest_fraction > 0.0 {
            (self.steps as f64 / (1.0 - self.discard_easiest_fraction)).round() as usize
        } else {
            self.steps
        }
    }
}

/// Human method label used in summaries and comparison tables.
pub fn method_label(mode: Mode, temperature: f64) -> String {
    match mode {
        Mode::Hbo => "HBO".to_string(),
        Mode::GlobalOnly => "HBO-global".to_string(),
        Mode::LocalOnly => "HBO-local".to_string(),
        Mode::Static => {
            if temperature == 1.0 {
                "Prop.".to_string()
            } else if temperature == 10.0 {
                "Temp.".to_string()
            } else if temperature.is_infinite() {
                "Uni.".to_string()
            } else {
                // Shortest round-trip form; Display would expand extreme
                // values like 1e300 into hundreds of digits.
                format!("Static(tau={temperature:?})")
            }
        }
    }
}

/// Per-subset held-out metrics plus macro-averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `exp` of the per-subset mean loss.
    pub per_subset_ppl: Vec<f64>,
    /// Mean over the subset's examples of the per-example mean NLL.
    pub per_subset_loss: Vec<f64>,
    /// Unweighted mean of the per-subset perplexities.
    pub macro_ppl: f64,
    /// Unweighted mean of the per-subset losses.
    pub macro_loss: f64,
}

impl EvalReport {
    /// Builds the macro-averages from per-subset values.
    pub fn from_per_subset(ppl: Vec<f64>, loss: Vec<f64>) -> Result<Self> {
        if ppl.is_empty() || ppl.len() != loss.len() {
            return Err(Error::Contract(format!(
                "per-subset metric lengths {} and {}",
                ppl.len(),
                loss.len()
            )));
        }
        let n = ppl.len() as f64;
        Ok(EvalReport {
            macro_ppl: ppl.iter().sum::<f64>() / n,
            macro_loss: loss.iter().sum::<f64>() / n,
            per_subset_ppl: ppl,
            per_subset_loss: loss,
        })
    }
}

/// Per-subset mean held-out loss and perplexity under `model`.
pub fn evaluate<S: Scalar>(
    model: &ToyLanguageModel<S>,
    heldout: &MixtureCorpus,
) -> Result<EvalReport> {
    if model.config().vocab_size != heldout.vocab_size() {
        return Err(Error::InvalidConfig(format!(
            "model vocabulary {} does not match corpus vocabulary {}",
            model.config().vocab_size,
            heldout.vocab_size()
        )));
    }
    let mut ppl = Vec::with_capacity(heldout.subset_count());
    let mut loss = Vec::with_capacity(heldout.subset_count());
    for subset in heldout.subsets() {
        let mut total = 0.0;
        let mut count = 0usize;
        for e in subset.iter() {
            total += model.example_nll(e, false)?.to_f64_lossy();
            count += 1;
        }
        let mean = total / count as f64;
        loss.push(mean);
        ppl.push(mean.exp());
    }
    EvalReport::from_per_subset(ppl, loss)
}

/// Training data, its held-out counterpart, and how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    /// The training portion, partitioned when the mode requires groups.
    pub train: MixtureCorpus,
    /// Withheld examples (unpartitioned); `None` when `heldout_fraction` is 0.
    pub heldout: Option<MixtureCorpus>,
}

impl PreparedData {
    /// Corpus evaluated against: the held-out slice, or the training data
    /// itself when nothing was withheld.
    pub fn eval_corpus(&self) -> &MixtureCorpus {
        self.heldout.as_ref().unwrap_or(&self.train)
    }
}

/// Withholds the held-out slice, scores, discards, and partitions.
///
/// Scoring statistics come from the training portion only. A corpus that
/// already carries difficulty scores is re-partitioned from its stored
/// scores and no scorer model is built. Static runs without discarding skip
/// scoring entirely (groups carry no weight there).
pub fn prepare<S: Scalar>(
    corpus: &MixtureCorpus,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<PreparedData> {
    cfg.validate()?;
    model_cfg.validate()?;
    if model_cfg.vocab_size != corpus.vocab_size() {
        return Err(Error::InvalidConfig(format!(
            "model vocabulary {} does not match corpus vocabulary {}",
            model_cfg.vocab_size,
            corpus.vocab_size()
        )));
    }

    let stored_scores = corpus.is_partitioned();
    // Flatten per subset, remembering stored scores and clearing group
    // assignments; everything downstream re-derives them.
    let mut per_subset: Vec<Vec<(ExampleRecord, f64)>> = corpus
        .subsets()
        .iter()
        .map(|subset| {
            subset
                .iter()
                .map(|e| {
                    let score = e.difficulty.unwrap_or(f64::NAN);
                    let mut bare = e.clone();
                    bare.group_id = None;
                    bare.difficulty = None;
                    (bare, score)
                })
                .collect()
        })
        .collect();

    // Held-out split: every `stride`-th example of each subset, in order.
    let heldout = if cfg.heldout_fraction > 0.0 {
        let stride = (1.0 / cfg.heldout_fraction).round() as usize;
        let mut held: Vec<Vec<ExampleRecord>> = Vec::with_capacity(per_subset.len());
        for (i, examples) in per_subset.iter_mut().enumerate() {
            if examples.len() < stride {
                return Err(Error::InvalidConfig(format!(
                    "heldout_fraction {} leaves subset {i} ({} examples) with no held-out slice",
                    cfg.heldout_fraction,
                    examples.len()
                )));
            }
            let mut kept = Vec::with_capacity(examples.len());
            let mut withheld = Vec::new();
            for (pos, pair) in examples.drain(..).enumerate() {
                if (pos + 1) % stride == 0 {
                    withheld.push(pair.0);
                } else {
                    kept.push(pair);
                }
            }
            *examples = kept;
            held.push(withheld);
        }
        Some(MixtureCorpus::from_examples(corpus.vocab_size(), held)?)
    } else {
        None
    };

    let needs_partition = !matches!(cfg.mode, Mode::Static);
    let needs_scores = needs_partition || cfg.discard_easiest_fraction > 0.0;
    if !needs_scores {
        let train = MixtureCorpus::from_examples(
            corpus.vocab_size(),
            per_subset
                .into_iter()
                .map(|v| v.into_iter().map(|(e, _)| e).collect())
                .collect(),
        )?;
        return Ok(PreparedData { train, heldout });
    }

    let flat = MixtureCorpus::from_examples(
        corpus.vocab_size(),
        per_subset
            .iter()
            .map(|v| v.iter().map(|(e, _)| e.clone()).collect())
            .collect(),
    )?;
    let scores: Vec<f64> = if stored_scores {
        per_subset.iter().flatten().map(|(_, s)| *s).collect()
    } else {
        let scorer = warmed_scorer::<S>(&flat, model_cfg, cfg)?;
        score_examples(&scorer, &flat, cfg.scorer.metric)?
    };

    // Discard the easiest-scored fraction of every subset, keeping the
    // survivors in their original relative order.
    let (flat, scores) = if cfg.discard_easiest_fraction > 0.0 {
        let mut kept_examples: Vec<Vec<ExampleRecord>> = Vec::with_capacity(flat.subset_count());
        let mut kept_scores: Vec<f64> = Vec::new();
        let mut offset = 0usize;
        for subset in flat.subsets() {
            let n = subset.len();
            let subset_scores = &scores[offset..offset + n];
            let drop = (cfg.discard_easiest_fraction * n as f64).floor() as usize;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                subset_scores[a]
                    .partial_cmp(&subset_scores[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let mut keep = vec![true; n];
            for &idx in order.iter().take(drop) {
                keep[idx] = false;
            }
            let mut survivors = Vec::with_capacity(n - drop);
            for (idx, e) in subset.iter().enumerate() {
                if keep[idx] {
                    survivors.push(e.clone());
                    kept_scores.push(subset_scores[idx]);
                }
            }
            if survivors.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "discard fraction {} empties a subset of {n} examples",
                    cfg.discard_easiest_fraction
                )));
            }
            kept_examples.push(survivors);
            offset += n;
        }
        (
            MixtureCorpus::from_examples(corpus.vocab_size(), kept_examples)?,
            kept_scores,
        )
    } else {
        (flat, scores)
    };

    let train = if needs_partition {
        partition_by_difficulty(&flat, &scores, cfg.group_count)?
    } else {
        flat
    };
    Ok(PreparedData { train, heldout })
}

/// Clone of the initial model, warmed with a few hundred uniform steps.
fn warmed_scorer<S: Scalar>(
    train: &MixtureCorpus,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<ToyLanguageModel<S>> {
    let mut scorer = ToyLanguageModel::<S>::init(model_cfg.clone(), cfg.seeds.train)?;
    if cfg.scorer.warmup_steps == 0 {
        return Ok(scorer);
    }
    let pool: Vec<&ExampleRecord> = train.iter_all().collect();
    let mut opt = OptimizerState::new(cfg.optimizer, model_cfg)?;
    let mut r = rng::stream(cfg.seeds.train, rng::STREAM_SCORER);
    for _ in 0..cfg.scorer.warmup_steps {
        let items: Vec<&ExampleRecord> = (0..cfg.scorer.warmup_batch_size)
            .map(|_| pool[r.random_range(0..pool.len())])
            .collect();
        let batch = Batch::new(items);
        let (_, grads) = scorer.backward(&batch)?;
        opt.step(scorer.params_mut(), &grads)?;
    }
    Ok(scorer)
}

/// Final state and artifacts of one run.
#[derive(Debug, Clone)]
pub struct RunResult<S: Scalar> {
    pub model: ToyLanguageModel<S>,
    /// Learned global actor, when the mode has one.
    pub global_actor: Option<ActorNetwork<S>>,
    /// Learned local actors in subset order; empty when frozen.
    pub local_actors: Vec<ActorNetwork<S>>,
    /// Global sampling distribution at the end of training.
    pub final_global_probs: Vec<f64>,
    /// Local sampling distributions at the end of training.
    pub final_local_probs: Vec<Vec<f64>>,
    pub eval: EvalReport,
    pub trajectory: Vec<TrajectoryRecord>,
    /// How many training batches each subset contributed.
    pub subset_draws: Vec<usize>,
    /// How many training batches each group contributed.
    pub group_draws: Vec<Vec<usize>>,
    /// Model updates actually executed (after discard rescaling).
    pub effective_steps: usize,
    /// Wall-clock milliseconds of the training loop itself.
    pub wall_ms: u64,
    pub mode: Mode,
    pub temperature: f64,
}

/// Runs the full bilevel loop. The corpus must already be partitioned into
/// difficulty groups (see [`prepare`]).
pub fn run_hbo<S: Scalar>(
    prep: &PreparedData,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<RunResult<S>> {
    if cfg.mode != Mode::Hbo {
        return Err(Error::InvalidConfig(format!(
            "run_hbo requires mode \"hbo\", config says {:?}",
            cfg.mode
        )));
    }
    require_partitioned(&prep.train)?;
    engine::run_engine(prep, model_cfg, cfg)
}

/// Runs a frozen baseline: subsets sampled from the temperature prior,
/// examples uniform within the subset.
pub fn run_static<S: Scalar>(
    prep: &PreparedData,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
    temperature: f64,
) -> Result<RunResult<S>> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Static;
    cfg.temperature = temperature;
    engine::run_engine(prep, model_cfg, &cfg)
}

/// Runs a single-actor, granularity, or discard ablation.
pub fn run_ablation<S: Scalar>(
    prep: &PreparedData,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<RunResult<S>> {
    let single_actor = matches!(cfg.mode, Mode::GlobalOnly | Mode::LocalOnly);
    let varied_k = cfg.group_count != RunConfig::default().group_count;
    let discards = cfg.discard_easiest_fraction > 0.0;
    if !(single_actor || varied_k || discards) {
        return Err(Error::InvalidConfig(
            "not an ablation: expected mode global-only/local-only, a non-default \
             group_count, or a positive discard_easiest_fraction"
                .into(),
        ));
    }
    if !matches!(cfg.mode, Mode::Static) {
        require_partitioned(&prep.train)?;
    }
    engine::run_engine(prep, model_cfg, cfg)
}

/// One-stop entry: prepares the data for `cfg.mode` and runs it.
pub fn run<S: Scalar>(
    corpus: &MixtureCorpus,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<RunResult<S>> {
    let prep = prepare::<S>(corpus, model_cfg, cfg)?;
    if !matches!(cfg.mode, Mode::Static) {
        require_partitioned(&prep.train)?;
    }
    engine::run_engine(&prep, model_cfg, cfg)
}

fn require_partitioned(corpus: &MixtureCorpus) -> Result<()> {
    if !corpus.is_partitioned() {
        return Err(Error::InvalidState(
            "this mode samples difficulty groups but the corpus is not partitioned".into(),
        ));
    }
    Ok(())
}
