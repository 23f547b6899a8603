//! The training loop: hierarchical batch routing, model updates, reward
//! sweeps, and trajectory logging.
//!
//! Every step draws a subset from the global policy, a group from that
//! subset's local policy, and a with-replacement batch from the group, then
//! applies one optimizer step. At steps divisible by an enabled actor's
//! period (including step 0), rewards are measured for every unit of that
//! level on fresh probe batches and the actor takes one accumulated
//! reinforcement step. When both levels fire on the same step the global
//! sweep runs first.
//!
//! Randomness discipline: batch routing and index draws consume only the
//! training stream; probe batches consume only the reward stream. Modes
//! that never sweep therefore stay step-for-step aligned with modes that
//! do, and any two runs differing only in reward settings sample identical
//! training batches. Probe batches for one sweep are drawn sequentially in
//! unit order before any reward is computed, so the optional thread-pool
//! evaluation cannot change results, only wall time.

use super::{evaluate, Mode, PreparedData, RunConfig, RunResult, TrajectoryRecord};
use crate::actors::{sample_index, ActorNetwork, SamplingDistribution};
use crate::error::{Error, Result};
use crate::mixture::sampling::temperature_distribution;
use crate::mixture::ExampleRecord;
use crate::model::optimizer::OptimizerState;
use crate::model::{Batch, ModelConfig, ToyLanguageModel};
use crate::rewards::{global_reward, local_reward, GlobalRewardKind};
use crate::rng;
use crate::scalar::Scalar;
use rand::Rng;
use rayon::prelude::*;
use std::time::Instant;

/// One sampling level: a reinforcement-learned actor or a fixed
/// distribution. A learned actor with `enabled = false` (update period
/// beyond the run length) keeps its initial distribution forever.
enum Policy<S: Scalar> {
    Learned { actor: ActorNetwork<S>, enabled: bool },
    Frozen(SamplingDistribution<S>),
}

impl<S: Scalar> Policy<S> {
    fn distribution(&self) -> SamplingDistribution<S> {
        match self {
            Policy::Learned { actor, .. } => actor.distribution(),
            Policy::Frozen(d) => d.clone(),
        }
    }

    fn fires_at(&self, step: usize, period: usize) -> bool {
        matches!(self, Policy::Learned { enabled: true, .. }) && step % period == 0
    }
}

/// Stable per-subset seed mix for local actor initialization, so sibling
/// actors do not share path-weight noise.
fn local_actor_seed(train_seed: u64, subset: usize) -> u64 {
    train_seed ^ (subset as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn draw_one<'a, R: Rng>(
    groups: &[&'a [ExampleRecord]],
    total: usize,
    rng: &mut R,
) -> &'a ExampleRecord {
    let mut x = rng.random_range(0..total);
    for g in groups {
        if x < g.len() {
            return &g[x];
        }
        x -= g.len();
    }
    let last = groups.last().expect("nonempty subset");
    &last[last.len() - 1]
}

pub(super) fn run_engine<S: Scalar>(
    prep: &PreparedData,
    model_cfg: &ModelConfig,
    cfg: &RunConfig,
) -> Result<RunResult<S>> {
    cfg.validate()?;
    model_cfg.validate()?;
    let train = &prep.train;
    if model_cfg.vocab_size != train.vocab_size() {
        return Err(Error::InvalidConfig(format!(
            "model vocabulary {} does not match corpus vocabulary {}",
            model_cfg.vocab_size,
            train.vocab_size()
        )));
    }

    let t_eff = cfg.effective_steps();
    let n = train.subset_count();
    let groups: Vec<Vec<&[ExampleRecord]>> = train
        .subsets()
        .iter()
        .map(|s| s.groups().iter().map(Vec::as_slice).collect())
        .collect();
    let subset_totals: Vec<usize> = groups
        .iter()
        .map(|gs| gs.iter().map(|g| g.len()).sum())
        .collect();
    let sizes = train.subset_sizes();

    let mut global: Policy<S> = match cfg.mode {
        Mode::Hbo | Mode::GlobalOnly => Policy::Learned {
            actor: ActorNetwork::init_from_prior(
                &sizes,
                cfg.temperature,
                &cfg.actor,
                cfg.seeds.train,
            )?,
            enabled: cfg.global_period <= t_eff,
        },
        Mode::LocalOnly | Mode::Static => Policy::Frozen(SamplingDistribution::new(
            temperature_distribution(&sizes, cfg.temperature)?,
        )?),
    };
    let mut locals: Vec<Policy<S>> = groups
        .iter()
        .enumerate()
        .map(|(i, gs)| {
            let group_sizes: Vec<usize> = gs.iter().map(|g| g.len()).collect();
            Ok(match cfg.mode {
                Mode::Hbo | Mode::LocalOnly => Policy::Learned {
                    actor: ActorNetwork::init_from_prior(
                        &group_sizes,
                        1.0,
                        &cfg.actor,
                        local_actor_seed(cfg.seeds.train, i),
                    )?,
                    enabled: cfg.local_period <= t_eff,
                },
                Mode::GlobalOnly => Policy::Frozen(SamplingDistribution::new(
                    temperature_distribution(&group_sizes, f64::INFINITY)?,
                )?),
                Mode::Static => Policy::Frozen(SamplingDistribution::new(
                    temperature_distribution(&group_sizes, 1.0)?,
                )?),
            })
        })
        .collect::<Result<_>>()?;

    let mut model = ToyLanguageModel::<S>::init(model_cfg.clone(), cfg.seeds.train)?;
    let mut opt = OptimizerState::new(cfg.optimizer, model_cfg)?;
    // Reference point for progress rewards, captured before any step.
    let initial = model.snapshot();

    let mut train_rng = rng::stream(cfg.seeds.train, rng::STREAM_TRAIN);
    let mut reward_rng = rng::stream(cfg.seeds.reward, rng::STREAM_REWARD);

    let mut global_dist = global.distribution();
    let mut local_dists: Vec<SamplingDistribution<S>> =
        locals.iter().map(Policy::distribution).collect();

    let global_lr = S::from_f64_lossy(cfg.global_lr);
    let local_lr = S::from_f64_lossy(cfg.local_lr);
    let mut subset_draws = vec![0usize; n];
    let mut group_draws: Vec<Vec<usize>> = groups.iter().map(|gs| vec![0; gs.len()]).collect();
    let mut trajectory = Vec::new();

    let started = Instant::now();
    for t in 0..t_eff {
        let i = sample_index(&global_dist, &mut train_rng);
        let j = sample_index(&local_dists[i], &mut train_rng);
        subset_draws[i] += 1;
        group_draws[i][j] += 1;

        let group = groups[i][j];
        let items: Vec<&ExampleRecord> = (0..cfg.batch_size)
            .map(|_| &group[train_rng.random_range(0..group.len())])
            .collect();
        let batch = Batch::new(items);
        let (loss, grads) = model.backward(&batch)?;
        opt.step(model.params_mut(), &grads)?;

        let mut step_global_rewards = None;
        if global.fires_at(t, cfg.global_period) {
            let rewards = global_sweep(&model, cfg, &groups, &subset_totals, &mut reward_rng)?;
            if let Policy::Learned { actor, .. } = &mut global {
                actor.reinforce_update(&rewards, global_lr, cfg.center_rewards)?;
                global_dist = actor.distribution();
            }
            step_global_rewards = Some(rewards.iter().map(|r| r.to_f64_lossy()).collect());
        }

        let locals_fire = locals
            .first()
            .map(|p| p.fires_at(t, cfg.local_period))
            .unwrap_or(false);
        let mut step_local_rewards = None;
        if locals_fire {
            let rewards = local_sweep(&model, &initial, cfg, &groups, &mut reward_rng)?;
            for (idx, policy) in locals.iter_mut().enumerate() {
                if let Policy::Learned { actor, .. } = policy {
                    actor.reinforce_update(&rewards[idx], local_lr, cfg.center_rewards)?;
                    local_dists[idx] = actor.distribution();
                }
            }
            step_local_rewards = Some(
                rewards
                    .iter()
                    .map(|rs| rs.iter().map(|r| r.to_f64_lossy()).collect())
                    .collect(),
            );
        }

        let eval_macro_ppl = if cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0 {
            Some(evaluate(&model, prep.eval_corpus())?.macro_ppl)
        } else {
            None
        };

        let swept = step_global_rewards.is_some() || step_local_rewards.is_some();
        if t % cfg.log_every == 0 || swept || eval_macro_ppl.is_some() || t + 1 == t_eff {
            trajectory.push(TrajectoryRecord {
                step: t,
                subset: i,
                group: j,
                loss: loss.to_f64_lossy(),
                global_probs: global_dist.to_f64(),
                local_probs: local_dists.iter().map(SamplingDistribution::to_f64).collect(),
                global_rewards: step_global_rewards,
                local_rewards: step_local_rewards,
                eval_macro_ppl,
            });
        }
    }
    let wall_ms = started.elapsed().as_millis() as u64;

    let eval = evaluate(&model, prep.eval_corpus())?;
    let final_global_probs = global_dist.to_f64();
    let final_local_probs: Vec<Vec<f64>> =
        local_dists.iter().map(SamplingDistribution::to_f64).collect();
    let global_actor = match global {
        Policy::Learned { actor, .. } => Some(actor),
        Policy::Frozen(_) => None,
    };
    let local_actors: Vec<ActorNetwork<S>> = locals
        .into_iter()
        .filter_map(|p| match p {
            Policy::Learned { actor, .. } => Some(actor),
            Policy::Frozen(_) => None,
        })
        .collect();

    Ok(RunResult {
        model,
        global_actor,
        local_actors,
        final_global_probs,
        final_local_probs,
        eval,
        trajectory,
        subset_draws,
        group_draws,
        effective_steps: t_eff,
        wall_ms,
        mode: cfg.mode,
        temperature: cfg.temperature,
    })
}

/// One reward per subset, probed on the current model. Batches are drawn in
/// subset order before anything is computed.
fn global_sweep<'a, S: Scalar, R: Rng>(
    model: &ToyLanguageModel<S>,
    cfg: &RunConfig,
    groups: &[Vec<&'a [ExampleRecord]>],
    subset_totals: &[usize],
    rng: &mut R,
) -> Result<Vec<S>> {
    let two_batches = cfg.global_reward == GlobalRewardKind::CosSim;
    let probes: Vec<(Vec<&'a ExampleRecord>, Vec<&'a ExampleRecord>)> = groups
        .iter()
        .zip(subset_totals)
        .map(|(gs, &total)| {
            let first: Vec<_> = (0..cfg.reward_batch_size)
                .map(|_| draw_one(gs, total, rng))
                .collect();
            let second: Vec<_> = if two_batches {
                (0..cfg.reward_batch_size)
                    .map(|_| draw_one(gs, total, rng))
                    .collect()
            } else {
                Vec::new()
            };
            (first, second)
        })
        .collect();

    let compute = |(first, second): &(Vec<&ExampleRecord>, Vec<&ExampleRecord>)| {
        global_reward(
            cfg.global_reward,
            model,
            &Batch::new(first.clone()),
            &Batch::new(second.clone()),
        )
    };
    if cfg.parallel_rewards {
        probes.par_iter().map(compute).collect()
    } else {
        probes.iter().map(compute).collect()
    }
}

/// One reward per group of every subset, probed against the initial
/// snapshot. Batches are drawn in (subset, group) order before computing.
fn local_sweep<'a, S: Scalar, R: Rng>(
    model: &ToyLanguageModel<S>,
    initial: &crate::model::ModelSnapshot<S>,
    cfg: &RunConfig,
    groups: &[Vec<&'a [ExampleRecord]>],
    rng: &mut R,
) -> Result<Vec<Vec<S>>> {
    let probes: Vec<Vec<Vec<&'a ExampleRecord>>> = groups
        .iter()
        .map(|gs| {
            gs.iter()
                .map(|g| {
                    (0..cfg.reward_batch_size)
                        .map(|_| &g[rng.random_range(0..g.len())])
                        .collect()
                })
                .collect()
        })
        .collect();

    let compute = |items: &Vec<&ExampleRecord>| {
        local_reward(cfg.local_reward, model, initial, &Batch::new(items.clone()))
    };
    let flat: Vec<&Vec<&ExampleRecord>> = probes.iter().flatten().collect();
    let values: Vec<S> = if cfg.parallel_rewards {
        flat.par_iter().map(|b| compute(b)).collect::<Result<_>>()?
    } else {
        flat.iter().map(|b| compute(b)).collect::<Result<_>>()?
    };

    let mut out = Vec::with_capacity(groups.len());
    let mut cursor = values.into_iter();
    for gs in groups {
        out.push(cursor.by_ref().take(gs.len()).collect());
    }
    Ok(out)
}
