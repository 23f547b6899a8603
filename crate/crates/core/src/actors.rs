//! Sampling-policy networks and their score-function updates.
//!
//! One actor owns one categorical distribution: the global actor over
//! subsets, and one local actor per subset over that subset's difficulty
//! groups. Each sampling unit is represented by a one-hot feature vector and
//! scored by a two-layer network (tanh hidden layer, scalar output); the
//! softmax over unit scores is the sampling distribution.
//!
//! Updates are plain score-function (REINFORCE) steps accumulated over all
//! units at once:
//!
//! ```text
//! psi <- psi + lr * sum_u R(u) * grad log p(u)
//! ```
//!
//! Because `grad log p(u) = sum_v (1[v=u] - p(v)) dz_v/dpsi`, the accumulated
//! step collapses to `lr * sum_v (R(v) - p(v) * sum_u R(u)) dz_v/dpsi`, which
//! is what `reinforce_update` applies. At the uniform distribution the
//! coefficients vanish for constant rewards, so equal rewards leave a uniform
//! actor exactly unchanged; reward differences are what move it.

use crate::error::{Error, Result};
use crate::mixture::sampling::temperature_distribution;
use crate::rng;
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Actor architecture settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorConfig {
    /// Hidden layer width.
    pub hidden_dim: usize,
    /// Std of the random path weights at initialization. The output bias
    /// absorbs the prior, so this only sets the scale of the trainable path.
    pub init_scale: f64,
}

impl Default for ActorConfig {
    fn default() -> Self {
        ActorConfig {
            hidden_dim: 32,
            init_scale: 1e-3,
        }
    }
}

impl ActorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("actor hidden_dim must be positive".into()));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "actor init_scale must be finite and non-negative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// A categorical distribution produced by an actor: strictly positive,
/// sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingDistribution<S> {
    probs: Vec<S>,
}

impl<S: Scalar> SamplingDistribution<S> {
    /// Wraps a probability vector, enforcing positivity and normalization.
    pub fn new(probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Contract("empty distribution".into()));
        }
        if probs.iter().any(|p| !(*p > S::zero()) || !p.is_finite()) {
            return Err(Error::Contract(format!(
                "distribution has non-positive or non-finite components: {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().map(|p| p.to_f64_lossy()).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("distribution sums to {sum}")));
        }
        Ok(SamplingDistribution { probs })
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probabilities widened to f64 (for logging).
    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64_lossy()).collect()
    }
}

/// Gradient of a log-probability with respect to every actor tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorGradient<S> {
    pub w1: Vec<S>,
    pub b1: Vec<S>,
    pub w2: Vec<S>,
    pub b_out: Vec<S>,
}

/// One policy network over `unit_count` sampling units.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorNetwork<S> {
    unit_count: usize,
    hidden_dim: usize,
    /// `unit_count x hidden`: with one-hot features, row `u` is the hidden
    /// pre-activation contribution of unit `u`.
    w1: Vec<S>,
    /// `hidden`.
    b1: Vec<S>,
    /// `hidden`.
    w2: Vec<S>,
    /// `unit_count`: per-unit output bias; carries the prior at init.
    b_out: Vec<S>,
}

impl<S: Scalar> ActorNetwork<S> {
    /// Initializes an actor whose distribution equals the temperature prior
    /// over `sizes` to float accuracy.
    ///
    /// Path weights are drawn small (std `cfg.init_scale`); the per-unit
    /// output bias is set to `ln prior(u)` minus that unit's random path
    /// output, so the initial logits are exactly the log prior.
    pub fn init_from_prior(
        sizes: &[usize],
        tau: f64,
        cfg: &ActorConfig,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let prior: Vec<S> = temperature_distribution(sizes, tau)?;
        let units = prior.len();
        let h = cfg.hidden_dim;
        let mut r = rng::stream(seed, rng::STREAM_ACTOR_INIT);
        let mut w1 = vec![S::zero(); units * h];
        let mut b1 = vec![S::zero(); h];
        let mut w2 = vec![S::zero(); h];
        for v in w1.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        for v in b1.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        for v in w2.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        let mut actor = ActorNetwork {
            unit_count: units,
            hidden_dim: h,
            w1,
            b1,
            w2,
            b_out: vec![S::zero(); units],
        };
        for u in 0..units {
            let path = actor.path_output(u);
            actor.b_out[u] = prior[u].ln() - path;
        }
        Ok(actor)
    }

    /// Rebuilds an actor from explicit tensors (checkpoint restore).
    pub fn from_parts(
        hidden_dim: usize,
        w1: Vec<S>,
        b1: Vec<S>,
        w2: Vec<S>,
        b_out: Vec<S>,
    ) -> Result<Self> {
        let units = b_out.len();
        if units == 0 || hidden_dim == 0 {
            return Err(Error::Contract("actor must have units and hidden width".into()));
        }
        if w1.len() != units * hidden_dim || b1.len() != hidden_dim || w2.len() != hidden_dim {
            return Err(Error::Contract(format!(
                "actor tensor shapes inconsistent: w1 {}, b1 {}, w2 {}, b_out {units}",
                w1.len(),
                b1.len(),
                w2.len()
            )));
        }
        Ok(ActorNetwork {
            unit_count: units,
            hidden_dim,
            w1,
            b1,
            w2,
            b_out,
        })
    }

    pub fn unit_count(&self) -> usize {
        self.unit_count
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// Named views over the tensors, fixed order (checkpoints, grad checks).
    pub fn tensors(&self) -> [(&'static str, &[S]); 4] {
        [
            ("w1", self.w1.as_slice()),
            ("b1", self.b1.as_slice()),
            ("w2", self.w2.as_slice()),
            ("b_out", self.b_out.as_slice()),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [S]); 4] {
        [
            ("w1", self.w1.as_mut_slice()),
            ("b1", self.b1.as_mut_slice()),
            ("w2", self.w2.as_mut_slice()),
            ("b_out", self.b_out.as_mut_slice()),
        ]
    }

    /// Network path output for unit `u` (everything except the output bias).
    fn path_output(&self, u: usize) -> S {
        let h = self.hidden_dim;
        let mut z = S::zero();
        for j in 0..h {
            z = z + self.w2[j] * (self.w1[u * h + j] + self.b1[j]).tanh();
        }
        z
    }

    /// Unit scores before the softmax.
    pub fn logits(&self) -> Vec<S> {
        (0..self.unit_count)
            .map(|u| self.path_output(u) + self.b_out[u])
            .collect()
    }

    /// Current sampling distribution (stabilized softmax over unit scores).
    ///
    /// Shifted exponents are floored at half the smallest representable
    /// exponent so that a saturated policy yields vanishing but strictly
    /// positive probabilities instead of exact zeros.
    pub fn distribution(&self) -> SamplingDistribution<S> {
        let logits = self.logits();
        let mut m = logits[0];
        for &z in &logits[1..] {
            if z > m {
                m = z;
            }
        }
        let floor = S::min_positive_value().ln() * S::from_f64_lossy(0.5);
        let exps: Vec<S> = logits.iter().map(|&z| (z - m).max(floor).exp()).collect();
        let sum: S = exps.iter().copied().sum();
        let probs = exps.into_iter().map(|e| e / sum).collect();
        SamplingDistribution::new(probs).expect("softmax output is a distribution")
    }

    /// Gradient of `ln p(unit)` with respect to every tensor.
    pub fn log_prob_gradient(&self, unit: usize) -> Result<ActorGradient<S>> {
        if unit >= self.unit_count {
            return Err(Error::InvalidIndex(format!(
                "unit {unit} of {}",
                self.unit_count
            )));
        }
        let h = self.hidden_dim;
        let p = self.distribution();
        let p = p.probs();
        let mut g = ActorGradient {
            w1: vec![S::zero(); self.w1.len()],
            b1: vec![S::zero(); h],
            w2: vec![S::zero(); h],
            b_out: vec![S::zero(); self.unit_count],
        };
        for v in 0..self.unit_count {
            let coef = if v == unit { S::one() - p[v] } else { -p[v] };
            g.b_out[v] = coef;
            for j in 0..h {
                let t = (self.w1[v * h + j] + self.b1[j]).tanh();
                let dt = S::one() - t * t;
                g.w2[j] = g.w2[j] + coef * t;
                g.b1[j] = g.b1[j] + coef * self.w2[j] * dt;
                g.w1[v * h + j] = coef * self.w2[j] * dt;
            }
        }
        Ok(g)
    }

    /// One accumulated score-function step: for every unit `u`,
    /// `psi += lr * R(u) * grad log p(u)`, applied as a single update
    /// evaluated at the pre-update parameters.
    ///
    /// With `center_rewards` the mean reward is subtracted first (variance
    /// reduction; off by default).
    pub fn reinforce_update(
        &mut self,
        rewards: &[S],
        lr: S,
        center_rewards: bool,
    ) -> Result<()> {
        if rewards.len() != self.unit_count {
            return Err(Error::InvalidReward(format!(
                "{} rewards for {} units",
                rewards.len(),
                self.unit_count
            )));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidReward(format!(
                "non-finite reward in {rewards:?}"
            )));
        }
        if !lr.is_finite() {
            return Err(Error::InvalidReward(format!("non-finite learning rate {lr}")));
        }
        let mut rewards = rewards.to_vec();
        if center_rewards {
            let mean = rewards.iter().copied().sum::<S>()
                / S::from_f64_lossy(rewards.len() as f64);
            for r in rewards.iter_mut() {
                *r = *r - mean;
            }
        }
        let h = self.hidden_dim;
        let p = self.distribution();
        let p = p.probs();
        let total: S = rewards.iter().copied().sum();
        // c_v = R(v) - p(v) * sum_u R(u); see module docs.
        let coefs: Vec<S> = rewards
            .iter()
            .zip(p)
            .map(|(&r, &pv)| r - pv * total)
            .collect();

        // Deltas are computed from the frozen pre-update tensors, then
        // applied at once.
        let mut d_w1 = vec![S::zero(); self.w1.len()];
        let mut d_b1 = vec![S::zero(); h];
        let mut d_w2 = vec![S::zero(); h];
        for v in 0..self.unit_count {
            let c = coefs[v];
            for j in 0..h {
                let t = (self.w1[v * h + j] + self.b1[j]).tanh();
                let dt = S::one() - t * t;
                d_w2[j] = d_w2[j] + c * t;
                d_b1[j] = d_b1[j] + c * self.w2[j] * dt;
                d_w1[v * h + j] = c * self.w2[j] * dt;
            }
        }
        // Extreme rewards can push a tensor past the representable range;
        // reject the whole update rather than corrupt the policy.
        let finite = d_w1
            .iter()
            .chain(&d_b1)
            .chain(&d_w2)
            .chain(&coefs)
            .all(|d| (lr * *d).is_finite());
        if !finite {
            return Err(Error::InvalidReward(format!(
                "reward magnitudes overflow the policy update: {rewards:?}"
            )));
        }
        for (w, d) in self.w1.iter_mut().zip(&d_w1) {
            *w = *w + lr * *d;
        }
        for (b, d) in self.b1.iter_mut().zip(&d_b1) {
            *b = *b + lr * *d;
        }
        for (w, d) in self.w2.iter_mut().zip(&d_w2) {
            *w = *w + lr * *d;
        }
        for (b, &c) in self.b_out.iter_mut().zip(&coefs) {
            *b = *b + lr * c;
        }
        Ok(())
    }
}

/// Draws one unit index. Consumes exactly one uniform variate, so every
/// categorical draw advances the stream by the same amount.
pub fn sample_index<S: Scalar, R: Rng>(
    dist: &SamplingDistribution<S>,
    rng: &mut R,
) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, p) in dist.probs().iter().enumerate() {
        cum += p.to_f64_lossy();
        if u < cum {
            return i;
        }
    }
    dist.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::sampling::total_variation;
    use proptest::prelude::*;

    fn logit_actor(logits: &[f64]) -> ActorNetwork<f64> {
        // Zero path: distribution is softmax of b_out exactly.
        let h = 3;
        ActorNetwork::from_parts(
            h,
            vec![0.0; logits.len() * h],
            vec![0.0; h],
            vec![0.0; h],
            logits.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn softmax_of_known_logits() {
        let a = logit_actor(&[0.0, 3f64.ln()]);
        let d = a.distribution();
        assert!((d.probs()[0] - 0.25).abs() < 1e-15);
        assert!((d.probs()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn init_matches_prior_on_temperature_grid() {
        let sizes = [10_000usize, 2_000, 500];
        let cfg = ActorConfig::default();
        for tau in [0.5, 1.0, 2.0, 10.0, f64::INFINITY] {
            let actor =
                ActorNetwork::<f64>::init_from_prior(&sizes, tau, &cfg, 99).unwrap();
            let want: Vec<f64> = temperature_distribution(&sizes, tau).unwrap();
            let got = actor.distribution();
            for (g, w) in got.probs().iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-6,
                    "tau {tau}: got {g}, want {w}"
                );
            }
        }
    }

    #[test]
    fn init_is_seeded_and_path_is_small() {
        let cfg = ActorConfig::default();
        let a = ActorNetwork::<f64>::init_from_prior(&[5, 5], 1.0, &cfg, 1).unwrap();
        let b = ActorNetwork::<f64>::init_from_prior(&[5, 5], 1.0, &cfg, 1).unwrap();
        let c = ActorNetwork::<f64>::init_from_prior(&[5, 5], 1.0, &cfg, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.w1, c.w1);
        assert!(a.w1.iter().all(|w| w.abs() < 1e-2));
    }

    #[test]
    fn single_unit_actor_is_degenerate() {
        let cfg = ActorConfig::default();
        let mut a = ActorNetwork::<f64>::init_from_prior(&[7], 1.0, &cfg, 3).unwrap();
        assert_eq!(a.distribution().probs(), &[1.0]);
        let g = a.log_prob_gradient(0).unwrap();
        assert!(g.b_out.iter().all(|&v| v == 0.0));
        assert!(g.w2.iter().all(|&v| v.abs() < 1e-15));
        let before = a.clone();
        a.reinforce_update(&[3.0], 0.1, false).unwrap();
        assert_eq!(a, before);
        let mut r = rng::stream(0, rng::STREAM_TRAIN);
        assert_eq!(sample_index(&a.distribution(), &mut r), 0);
    }

    #[test]
    fn sample_frequencies_match_probabilities() {
        let a = logit_actor(&[0.0, 0.0]);
        let d = a.distribution();
        let mut r = rng::stream(42, rng::STREAM_TRAIN);
        let n = 100_000;
        let ones = (0..n).filter(|_| sample_index(&d, &mut r) == 1).count();
        let freq = ones as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "freq {freq}");
    }

    #[test]
    fn log_prob_gradient_matches_finite_differences() {
        let cfg = ActorConfig {
            hidden_dim: 4,
            init_scale: 0.3, // sizable weights so every path matters
        };
        let actor = ActorNetwork::<f64>::init_from_prior(&[3, 5, 2], 2.0, &cfg, 17).unwrap();
        let h = 1e-6;
        for unit in 0..3 {
            let g = actor.log_prob_gradient(unit).unwrap();
            let flat_g: Vec<f64> = g
                .w1
                .iter()
                .chain(&g.b1)
                .chain(&g.w2)
                .chain(&g.b_out)
                .copied()
                .collect();
            let mut probe = actor.clone();
            let mut flat_idx = 0;
            for ti in 0..4 {
                let len = probe.tensors()[ti].1.len();
                for i in 0..len {
                    let orig = probe.tensors()[ti].1[i];
                    probe.tensors_mut()[ti].1[i] = orig + h;
                    let up = probe.distribution().probs()[unit].ln();
                    probe.tensors_mut()[ti].1[i] = orig - h;
                    let down = probe.distribution().probs()[unit].ln();
                    probe.tensors_mut()[ti].1[i] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    let analytic = flat_g[flat_idx];
                    flat_idx += 1;
                    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                    assert!(
                        ((analytic - numeric) / denom).abs() < 1e-4,
                        "unit {unit} tensor {ti} idx {i}: {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn reinforce_equals_sum_of_log_prob_gradients() {
        let cfg = ActorConfig {
            hidden_dim: 4,
            init_scale: 0.2,
        };
        let actor = ActorNetwork::<f64>::init_from_prior(&[4, 4, 8], 1.0, &cfg, 5).unwrap();
        let rewards = [0.8, 0.1, 0.5];
        let lr = 1e-3;

        let mut fast = actor.clone();
        fast.reinforce_update(&rewards, lr, false).unwrap();

        let mut slow = actor.clone();
        let grads: Vec<ActorGradient<f64>> = (0..3)
            .map(|u| actor.log_prob_gradient(u).unwrap())
            .collect();
        for j in 0..slow.w1.len() {
            let sum: f64 = (0..3).map(|u| rewards[u] * grads[u].w1[j]).sum();
            slow.w1[j] += lr * sum;
        }
        for j in 0..slow.b1.len() {
            let sum: f64 = (0..3).map(|u| rewards[u] * grads[u].b1[j]).sum();
            slow.b1[j] += lr * sum;
        }
        for j in 0..slow.w2.len() {
            let sum: f64 = (0..3).map(|u| rewards[u] * grads[u].w2[j]).sum();
            slow.w2[j] += lr * sum;
        }
        for j in 0..slow.b_out.len() {
            let sum: f64 = (0..3).map(|u| rewards[u] * grads[u].b_out[j]).sum();
            slow.b_out[j] += lr * sum;
        }
        for (ta, tb) in fast.tensors().iter().zip(slow.tensors().iter()) {
            for (x, y) in ta.1.iter().zip(tb.1.iter()) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn equal_rewards_leave_uniform_actor_unchanged() {
        // At the uniform point the summed score function vanishes for
        // constant rewards, so the distribution stays put.
        let cfg = ActorConfig::default();
        let mut actor =
            ActorNetwork::<f64>::init_from_prior(&[10, 20, 30, 40], f64::INFINITY, &cfg, 8)
                .unwrap();
        let before = actor.distribution();
        actor.reinforce_update(&[2.5; 4], 1e-3, false).unwrap();
        let after = actor.distribution();
        assert!(total_variation(before.probs(), after.probs()).unwrap() < 1e-9);
    }

    #[test]
    fn centering_makes_equal_rewards_a_no_op_everywhere() {
        let cfg = ActorConfig::default();
        let mut actor =
            ActorNetwork::<f64>::init_from_prior(&[1, 2, 7], 1.0, &cfg, 8).unwrap();
        let before = actor.clone();
        actor.reinforce_update(&[2.5; 3], 1e-2, true).unwrap();
        assert_eq!(actor, before);
    }

    #[test]
    fn rejects_bad_rewards() {
        let cfg = ActorConfig::default();
        let mut actor = ActorNetwork::<f64>::init_from_prior(&[3, 3], 1.0, &cfg, 0).unwrap();
        assert!(matches!(
            actor.reinforce_update(&[1.0], 0.1, false),
            Err(Error::InvalidReward(_))
        ));
        assert!(matches!(
            actor.reinforce_update(&[1.0, f64::NAN], 0.1, false),
            Err(Error::InvalidReward(_))
        ));
        assert!(matches!(
            actor.log_prob_gradient(5),
            Err(Error::InvalidIndex(_))
        ));
    }

    #[test]
    fn distribution_constructor_validates() {
        assert!(SamplingDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(SamplingDistribution::new(vec![1.0, 0.0]).is_err());
        assert!(SamplingDistribution::<f64>::new(vec![]).is_err());
        assert!(SamplingDistribution::new(vec![0.25, 0.75]).is_ok());
    }

    /// Driving one unit's logit thousands of nats above the rest must
    /// still yield a valid distribution (saturated, not zero) and further
    /// updates must keep working.
    #[test]
    fn saturated_policy_stays_a_valid_distribution() {
        let cfg = ActorConfig::default();
        let mut actor = ActorNetwork::<f64>::init_from_prior(&[5, 5, 5], 1.0, &cfg, 0).unwrap();
        for _ in 0..200 {
            actor
                .reinforce_update(&[100.0, 0.0, 0.0], 1.0, false)
                .unwrap();
        }
        let dist = actor.distribution();
        assert!(dist.probs()[0] > 0.999);
        for &p in dist.probs() {
            assert!(p > 0.0 && p.is_finite());
        }
        let sum: f64 = dist.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        // Opposing rewards pull it back without numeric damage.
        for _ in 0..200 {
            actor
                .reinforce_update(&[0.0, 100.0, 0.0], 1.0, false)
                .unwrap();
        }
        let dist = actor.distribution();
        assert!(dist.probs()[1] > 0.5);
        // Astronomical rewards are rejected instead of corrupting tensors.
        let before = actor.distribution();
        assert!(matches!(
            actor.reinforce_update(&[1e308, 0.0, 0.0], 1e6, false),
            Err(Error::InvalidReward(_))
        ));
        assert_eq!(before.probs(), actor.distribution().probs());
    }

    proptest! {
        #[test]
        fn indicator_reward_never_decreases_target_probability(
            sizes in prop::collection::vec(1usize..50, 2..6),
            seed in 0u64..500,
            target in 0usize..6,
        ) {
            let target = target % sizes.len();
            let cfg = ActorConfig { hidden_dim: 6, init_scale: 0.1 };
            let mut actor =
                ActorNetwork::<f64>::init_from_prior(&sizes, 1.0, &cfg, seed).unwrap();
            let before = actor.distribution().probs()[target];
            let mut rewards = vec![0.0; sizes.len()];
            rewards[target] = 1.0;
            actor.reinforce_update(&rewards, 1e-2, false).unwrap();
            let after = actor.distribution().probs()[target];
            prop_assert!(after >= before - 1e-12, "{before} -> {after}");
        }

        #[test]
        fn distributions_stay_normalized_under_updates(
            seed in 0u64..200,
            lr in 1e-4f64..0.5,
        ) {
            let cfg = ActorConfig::default();
            let mut actor =
                ActorNetwork::<f64>::init_from_prior(&[5, 10, 15], 1.0, &cfg, seed).unwrap();
            for step in 0..5 {
                let rewards = [
                    (seed as f64 * 0.1 + step as f64).sin().abs(),
                    0.3,
                    (step as f64 * 0.7).cos().abs(),
                ];
                actor.reinforce_update(&rewards, lr, false).unwrap();
            }
            let d = actor.distribution();
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(d.probs().iter().all(|&p| p > 0.0));
        }
    }
}
