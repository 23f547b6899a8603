//! Deterministic random-number streams.
//!
//! Reproducibility rests on two rules. First, every stochastic component
//! owns a dedicated ChaCha stream, so a decision made by one component can
//! never shift the draws seen by another; in particular, reward batches are
//! identical across runs with the same reward seed no matter what the actors
//! decide. Second, every categorical draw consumes exactly one uniform
//! variate, so structurally equivalent runs consume their streams in
//! lockstep. The stream ids below are part of the determinism contract:
//! renumbering them changes every seeded artifact.

use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Corpus generation (keyed by the corpus seed).
pub const STREAM_CORPUS: u64 = 1;
/// Model parameter initialization (keyed by the training seed).
pub const STREAM_MODEL_INIT: u64 = 2;
/// Actor parameter initialization (keyed by the training seed).
pub const STREAM_ACTOR_INIT: u64 = 3;
/// Subset/group/example draws of the training loop (training seed).
pub const STREAM_TRAIN: u64 = 4;
/// Reward batch draws (keyed by the reward seed).
pub const STREAM_REWARD: u64 = 5;
/// Difficulty-scorer warmup batches (training seed).
pub const STREAM_SCORER: u64 = 6;

/// Returns the ChaCha generator for (`seed`, `stream_id`).
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// One uniform draw from [0, 1).
pub fn uniform_unit<S: Scalar, R: Rng>(rng: &mut R) -> S {
    S::from_f64_lossy(rng.random::<f64>())
}

/// One zero-mean Gaussian draw with the given standard deviation.
pub fn normal<S: Scalar, R: Rng>(rng: &mut R, std: f64) -> S {
    let z: f64 = StandardNormal.sample(rng);
    S::from_f64_lossy(z * std)
}
