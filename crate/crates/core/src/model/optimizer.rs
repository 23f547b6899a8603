//! Plain SGD and AdamW over the model's parameter tensors.
//!
//! AdamW keeps per-parameter first and second moment estimates with bias
//! correction, and applies weight decay decoupled from the adaptive term:
//!
//! ```text
//! m <- b1 m + (1 - b1) g        mhat = m / (1 - b1^t)
//! v <- b2 v + (1 - b2) g^2      vhat = v / (1 - b2^t)
//! p <- p - lr (mhat / (sqrt(vhat) + eps) + wd * p)
//! ```
//!
//! so with zero gradients and zero decay parameters are a fixed point, and
//! pure decay shrinks parameters multiplicatively regardless of moments.

use super::{ModelConfig, Parameters};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    AdamW,
}

/// Optimizer hyperparameters. Moment settings are ignored by SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Model learning rate (alpha).
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::AdamW,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        for (name, v, lo, hi) in [
            ("beta1", self.beta1, 0.0, 1.0),
            ("beta2", self.beta2, 0.0, 1.0),
        ] {
            if !v.is_finite() || v < lo || v >= hi {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Mutable optimizer state (moments and step counter).
#[derive(Debug, Clone)]
pub struct OptimizerState<S> {
    cfg: OptimizerConfig,
    t: u64,
    moments: Option<(Parameters<S>, Parameters<S>)>,
}

impl<S: Scalar> OptimizerState<S> {
    pub fn new(cfg: OptimizerConfig, model_cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let moments = match cfg.kind {
            OptimizerKind::Sgd => None,
            OptimizerKind::AdamW => Some((
                Parameters::zeros(model_cfg),
                Parameters::zeros(model_cfg),
            )),
        };
        Ok(OptimizerState {
            cfg,
            t: 0,
            moments,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    /// Steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One in-place update of `params` from `grads`.
    pub fn step(&mut self, params: &mut Parameters<S>, grads: &Parameters<S>) -> Result<()> {
        for ((_, p), (_, g)) in params.tensors().iter().zip(grads.tensors().iter()) {
            if p.len() != g.len() {
                return Err(Error::Contract(format!(
                    "gradient shape mismatch: {} vs {}",
                    p.len(),
                    g.len()
                )));
            }
        }
        self.t += 1;
        let lr = S::from_f64_lossy(self.cfg.lr);
        match self.cfg.kind {
            OptimizerKind::Sgd => {
                let wd = S::from_f64_lossy(self.cfg.weight_decay);
                for ((_, p), (_, g)) in params
                    .tensors_mut()
                    .into_iter()
                    .zip(grads.tensors().into_iter())
                {
                    for (pv, &gv) in p.iter_mut().zip(g.iter()) {
                        *pv = *pv - lr * (gv + wd * *pv);
                    }
                }
            }
            OptimizerKind::AdamW => {
                let b1 = S::from_f64_lossy(self.cfg.beta1);
                let b2 = S::from_f64_lossy(self.cfg.beta2);
                let eps = S::from_f64_lossy(self.cfg.eps);
                let wd = S::from_f64_lossy(self.cfg.weight_decay);
                let one = S::one();
                let corr1 = one - S::from_f64_lossy(self.cfg.beta1.powi(self.t as i32));
                let corr2 = one - S::from_f64_lossy(self.cfg.beta2.powi(self.t as i32));
                let (m, v) = self.moments.as_mut().expect("adamw keeps moments");
                for (((_, p), (_, g)), ((_, ms), (_, vs))) in params
                    .tensors_mut()
                    .into_iter()
                    .zip(grads.tensors().into_iter())
                    .zip(m.tensors_mut().into_iter().zip(v.tensors_mut().into_iter()))
                {
                    for i in 0..p.len() {
                        let gv = g[i];
                        ms[i] = b1 * ms[i] + (one - b1) * gv;
                        vs[i] = b2 * vs[i] + (one - b2) * gv * gv;
                        let mhat = ms[i] / corr1;
                        let vhat = vs[i] / corr2;
                        p[i] = p[i] - lr * (mhat / (vhat.sqrt() + eps) + wd * p[i]);
                    }
                }
            }
        }
        Ok(())
    }
}
