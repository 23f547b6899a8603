//! A small context-window language model with hand-written backprop.
//!
//! The model predicts the next token from a fixed window of `w` preceding
//! tokens: each context token is embedded (`d` dims), the `w` embeddings are
//! concatenated, pushed through one tanh layer (`h` units), and projected to
//! vocabulary logits. Softmax is evaluated in log space with the usual
//! max-shift, so losses stay finite for any parameter values.
//!
//! Only response tokens are scored. The instruction contributes context;
//! positions before the start of the sequence (and instruction positions,
//! when an evaluation asks to hide the instruction) are filled with a
//! reserved padding token that owns the last embedding row. Per-example loss
//! is the mean negative log-likelihood over the example's response positions,
//! and batch loss is the mean of the per-example means, so long responses do
//! not dominate.
//!
//! Gradients are exact analytic derivatives of that loss, accumulated in a
//! fixed order (examples, then positions); the test suite checks them
//! against central finite differences.

pub mod checkpoint;
pub mod optimizer;

use crate::error::{Error, Result};
use crate::mixture::ExampleRecord;
use crate::rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Model architecture and initialization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Number of data tokens; the padding token is stored internally as one
    /// extra embedding row and never predicted.
    pub vocab_size: usize,
    /// Context window length `w`.
    pub context_window: usize,
    /// Embedding dimension `d`.
    pub embed_dim: usize,
    /// Hidden layer width `h`.
    pub hidden_dim: usize,
    /// Standard deviation of the Gaussian weight init; biases start at zero.
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 32,
            context_window: 4,
            embed_dim: 16,
            hidden_dim: 32,
            init_scale: 0.1,
        }
    }
}

impl ModelConfig {
    /// Embedding rows: data tokens plus the padding row.
    pub fn embed_rows(&self) -> usize {
        self.vocab_size + 1
    }

    /// Concatenated context width `w * d`.
    pub fn input_dim(&self) -> usize {
        self.context_window * self.embed_dim
    }

    /// Internal id of the padding token.
    pub fn pad_token(&self) -> u32 {
        self.vocab_size as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "vocab_size must be at least 2, got {}",
                self.vocab_size
            )));
        }
        if self.context_window == 0 || self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidConfig(
                "context_window, embed_dim and hidden_dim must be positive".into(),
            ));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "init_scale must be finite and non-negative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// All trainable tensors, row-major. The same struct carries gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters<S> {
    /// `(vocab_size + 1) x d`; the last row embeds the padding token.
    pub embed: Vec<S>,
    /// `(w * d) x h`.
    pub w1: Vec<S>,
    /// `h`.
    pub b1: Vec<S>,
    /// `h x vocab_size`.
    pub w2: Vec<S>,
    /// `vocab_size`.
    pub b2: Vec<S>,
}

impl<S: Scalar> Parameters<S> {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        Parameters {
            embed: vec![S::zero(); cfg.embed_rows() * cfg.embed_dim],
            w1: vec![S::zero(); cfg.input_dim() * cfg.hidden_dim],
            b1: vec![S::zero(); cfg.hidden_dim],
            w2: vec![S::zero(); cfg.hidden_dim * cfg.vocab_size],
            b2: vec![S::zero(); cfg.vocab_size],
        }
    }

    /// Named views over every tensor, in a fixed order shared by the
    /// optimizer, the checkpoint format, and the gradient checks.
    pub fn tensors(&self) -> [(&'static str, &[S]); 5] {
        [
            ("embed", self.embed.as_slice()),
            ("w1", self.w1.as_slice()),
            ("b1", self.b1.as_slice()),
            ("w2", self.w2.as_slice()),
            ("b2", self.b2.as_slice()),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [S]); 5] {
        [
            ("embed", self.embed.as_mut_slice()),
            ("w1", self.w1.as_mut_slice()),
            ("b1", self.b1.as_mut_slice()),
            ("w2", self.w2.as_mut_slice()),
            ("b2", self.b2.as_mut_slice()),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Euclidean norm over every component of every tensor.
    pub fn l2_norm(&self) -> S {
        let mut acc = S::zero();
        for (_, t) in self.tensors() {
            for &v in t {
                acc = acc + v * v;
            }
        }
        acc.sqrt()
    }

    fn shapes_match(&self, other: &Self) -> bool {
        self.embed.len() == other.embed.len()
            && self.w1.len() == other.w1.len()
            && self.b1.len() == other.b1.len()
            && self.w2.len() == other.w2.len()
            && self.b2.len() == other.b2.len()
    }
}

/// A batch: references into a corpus, at least one example.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    items: Vec<&'a ExampleRecord>,
}

impl<'a> Batch<'a> {
    pub fn new(items: Vec<&'a ExampleRecord>) -> Self {
        Batch { items }
    }

    pub fn from_slice(examples: &'a [ExampleRecord]) -> Self {
        Batch {
            items: examples.iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &&'a ExampleRecord> {
        self.items.iter()
    }
}

/// Frozen copy of the model at some instant (the initial parameters, for
/// progress-ratio rewards and difficulty scoring).
#[derive(Debug, Clone)]
pub struct ModelSnapshot<S> {
    model: ToyLanguageModel<S>,
}

impl<S: Scalar> ModelSnapshot<S> {
    pub fn model(&self) -> &ToyLanguageModel<S> {
        &self.model
    }

    /// True when the snapshot was taken from a model of this configuration.
    pub fn compatible_with(&self, cfg: &ModelConfig) -> bool {
        self.model.cfg == *cfg
    }
}

/// The context-window language model.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyLanguageModel<S> {
    cfg: ModelConfig,
    params: Parameters<S>,
}

impl<S: Scalar> ToyLanguageModel<S> {
    /// Fresh model with Gaussian weights of std `cfg.init_scale` and zero
    /// biases. Draw order (embedding, first layer, output layer) is fixed.
    pub fn init(cfg: ModelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut r = rng::stream(seed, rng::STREAM_MODEL_INIT);
        let mut params = Parameters::zeros(&cfg);
        for v in params.embed.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        for v in params.w1.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        for v in params.w2.iter_mut() {
            *v = rng::normal(&mut r, cfg.init_scale);
        }
        Ok(ToyLanguageModel { cfg, params })
    }

    /// Builds a model from explicit tensors, checking every shape.
    pub fn from_parts(cfg: ModelConfig, params: Parameters<S>) -> Result<Self> {
        cfg.validate()?;
        let expected = Parameters::<S>::zeros(&cfg);
        if !params.shapes_match(&expected) {
            return Err(Error::Contract(format!(
                "parameter shapes do not match config (embed {} vs {}, w1 {} vs {}, \
                 b1 {} vs {}, w2 {} vs {}, b2 {} vs {})",
                params.embed.len(),
                expected.embed.len(),
                params.w1.len(),
                expected.w1.len(),
                params.b1.len(),
                expected.b1.len(),
                params.w2.len(),
                expected.w2.len(),
                params.b2.len(),
                expected.b2.len(),
            )));
        }
        Ok(ToyLanguageModel { cfg, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &Parameters<S> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters<S> {
        &mut self.params
    }

    /// Frozen copy of the current parameters.
    pub fn snapshot(&self) -> ModelSnapshot<S> {
        ModelSnapshot {
            model: self.clone(),
        }
    }

    fn validate_example(&self, e: &ExampleRecord) -> Result<()> {
        if e.response.is_empty() {
            return Err(Error::InvalidExample("empty response".into()));
        }
        if e.instruction.is_empty() {
            return Err(Error::InvalidExample("empty instruction".into()));
        }
        for &t in e.instruction.iter().chain(&e.response) {
            if t as usize >= self.cfg.vocab_size {
                return Err(Error::InvalidExample(format!(
                    "token {t} outside vocabulary of size {}",
                    self.cfg.vocab_size
                )));
            }
        }
        Ok(())
    }

    /// Fills `buf` (length `w`) with the context of response position `l`:
    /// the `w` tokens preceding it in `instruction ++ response`, left-padded
    /// at the sequence start. With `mask_instruction`, instruction positions
    /// contribute padding instead of their tokens, so the model conditions
    /// only on the response's own prefix.
    fn context_at(
        &self,
        e: &ExampleRecord,
        l: usize,
        mask_instruction: bool,
        buf: &mut [u32],
    ) {
        let w = self.cfg.context_window;
        let pad = self.cfg.pad_token();
        let ilen = e.instruction.len() as isize;
        let abs = ilen + l as isize;
        for (k, slot) in buf.iter_mut().enumerate().take(w) {
            let pos = abs - w as isize + k as isize;
            *slot = if pos < 0 {
                pad
            } else if pos < ilen {
                if mask_instruction {
                    pad
                } else {
                    e.instruction[pos as usize]
                }
            } else {
                e.response[(pos - ilen) as usize]
            };
        }
    }

    /// Forward pass for one context window. Returns the index of the max
    /// logit trick's log-sum-exp so callers can form log-probabilities.
    fn forward_context(&self, ctx: &[u32], scratch: &mut Scratch<S>) {
        let cfg = &self.cfg;
        let d = cfg.embed_dim;
        let h = cfg.hidden_dim;
        let v = cfg.vocab_size;
        let p = &self.params;

        for (k, &tok) in ctx.iter().enumerate() {
            let row = tok as usize * d;
            scratch.x[k * d..(k + 1) * d].copy_from_slice(&p.embed[row..row + d]);
        }
        for j in 0..h {
            let mut z = p.b1[j];
            for (r, &xr) in scratch.x.iter().enumerate() {
                z = z + xr * p.w1[r * h + j];
            }
            scratch.a1[j] = z.tanh();
        }
        for t in 0..v {
            scratch.logits[t] = p.b2[t];
        }
        for j in 0..h {
            let aj = scratch.a1[j];
            let row = j * v;
            for t in 0..v {
                scratch.logits[t] = scratch.logits[t] + aj * p.w2[row + t];
            }
        }
        let mut m = scratch.logits[0];
        for &l in &scratch.logits[1..] {
            if l > m {
                m = l;
            }
        }
        let mut sum = S::zero();
        for t in 0..v {
            let e = (scratch.logits[t] - m).exp();
            scratch.probs[t] = e;
            sum = sum + e;
        }
        scratch.lse = m + sum.ln();
        for t in 0..v {
            scratch.probs[t] = scratch.probs[t] / sum;
        }
    }

    /// Mean negative log-likelihood over one example's response positions.
    /// With `mask_instruction` the instruction tokens are hidden behind
    /// padding, giving the unconditional response likelihood.
    pub fn example_nll(&self, e: &ExampleRecord, mask_instruction: bool) -> Result<S> {
        self.validate_example(e)?;
        let w = self.cfg.context_window;
        let mut ctx = vec![0u32; w];
        let mut scratch = Scratch::new(&self.cfg);
        let mut total = S::zero();
        for (l, &target) in e.response.iter().enumerate() {
            self.context_at(e, l, mask_instruction, &mut ctx);
            self.forward_context(&ctx, &mut scratch);
            let logp = scratch.logits[target as usize] - scratch.lse;
            total = total - logp;
        }
        Ok(total / S::from_f64_lossy(e.response.len() as f64))
    }

    /// Batch loss: mean over examples of the per-example mean NLL.
    pub fn nll_loss(&self, batch: &Batch) -> Result<S> {
        if batch.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        let mut total = S::zero();
        for e in batch.iter() {
            total = total + self.example_nll(e, false)?;
        }
        Ok(total / S::from_f64_lossy(batch.len() as f64))
    }

    /// Per-example perplexity `exp(mean NLL)`, conditioned on the
    /// instruction.
    pub fn perplexity(&self, e: &ExampleRecord) -> Result<S> {
        Ok(self.example_nll(e, false)?.exp())
    }

    /// Perplexity of the response with the instruction hidden behind padding:
    /// the model sees only the response's own preceding tokens.
    pub fn perplexity_response_only(&self, e: &ExampleRecord) -> Result<S> {
        Ok(self.example_nll(e, true)?.exp())
    }

    /// Mean tanh-layer activation over every scored (response) position in
    /// the batch. Linearity: averaging two equal-position-count batches
    /// yields the mean of their vectors.
    pub fn hidden_state(&self, batch: &Batch) -> Result<Vec<S>> {
        if batch.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        let w = self.cfg.context_window;
        let mut ctx = vec![0u32; w];
        let mut scratch = Scratch::new(&self.cfg);
        let mut acc = vec![S::zero(); self.cfg.hidden_dim];
        let mut positions = 0usize;
        for e in batch.iter() {
            self.validate_example(e)?;
            for l in 0..e.response.len() {
                self.context_at(e, l, false, &mut ctx);
                self.forward_context(&ctx, &mut scratch);
                for (a, &v) in acc.iter_mut().zip(&scratch.a1) {
                    *a = *a + v;
                }
                positions += 1;
            }
        }
        let n = S::from_f64_lossy(positions as f64);
        for a in acc.iter_mut() {
            *a = *a / n;
        }
        Ok(acc)
    }

    /// Batch loss and its exact gradient with respect to every parameter.
    ///
    /// Accumulation order is fixed (batch order, then position order) so
    /// equal inputs produce bit-equal gradients.
    pub fn backward(&self, batch: &Batch) -> Result<(S, Parameters<S>)> {
        if batch.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        let cfg = &self.cfg;
        let (w, d, h, v) = (
            cfg.context_window,
            cfg.embed_dim,
            cfg.hidden_dim,
            cfg.vocab_size,
        );
        let p = &self.params;
        let mut grads = Parameters::zeros(cfg);
        let mut ctx = vec![0u32; w];
        let mut scratch = Scratch::new(cfg);
        let mut dlogits = vec![S::zero(); v];
        let mut dz1 = vec![S::zero(); h];
        let mut loss = S::zero();
        let inv_batch = S::one() / S::from_f64_lossy(batch.len() as f64);

        for e in batch.iter() {
            self.validate_example(e)?;
            let weight = inv_batch / S::from_f64_lossy(e.response.len() as f64);
            for (l, &target) in e.response.iter().enumerate() {
                self.context_at(e, l, false, &mut ctx);
                self.forward_context(&ctx, &mut scratch);
                let t = target as usize;
                loss = loss - (scratch.logits[t] - scratch.lse) * weight;

                for (i, dl) in dlogits.iter_mut().enumerate() {
                    let indicator = if i == t { S::one() } else { S::zero() };
                    *dl = (scratch.probs[i] - indicator) * weight;
                }
                for (i, &dl) in dlogits.iter().enumerate() {
                    grads.b2[i] = grads.b2[i] + dl;
                }
                for j in 0..h {
                    let aj = scratch.a1[j];
                    let row = j * v;
                    let mut da = S::zero();
                    for (i, &dl) in dlogits.iter().enumerate() {
                        grads.w2[row + i] = grads.w2[row + i] + aj * dl;
                        da = da + p.w2[row + i] * dl;
                    }
                    dz1[j] = da * (S::one() - aj * aj);
                }
                for (j, &dz) in dz1.iter().enumerate() {
                    grads.b1[j] = grads.b1[j] + dz;
                }
                for (r, &xr) in scratch.x.iter().enumerate() {
                    let row = r * h;
                    for (j, &dz) in dz1.iter().enumerate() {
                        grads.w1[row + j] = grads.w1[row + j] + xr * dz;
                    }
                }
                // d loss / d x scattered back into the context rows.
                for (k, &tok) in ctx.iter().enumerate() {
                    let erow = tok as usize * d;
                    for a in 0..d {
                        let r = k * d + a;
                        let row = r * h;
                        let mut dx = S::zero();
                        for (j, &dz) in dz1.iter().enumerate() {
                            dx = dx + p.w1[row + j] * dz;
                        }
                        grads.embed[erow + a] = grads.embed[erow + a] + dx;
                    }
                }
            }
        }
        Ok((loss, grads))
    }

    /// Euclidean norm of the full loss gradient on this batch.
    pub fn grad_l2_norm(&self, batch: &Batch) -> Result<S> {
        let (_, grads) = self.backward(batch)?;
        Ok(grads.l2_norm())
    }
}

/// Reusable per-position buffers.
struct Scratch<S> {
    x: Vec<S>,
    a1: Vec<S>,
    logits: Vec<S>,
    probs: Vec<S>,
    lse: S,
}

impl<S: Scalar> Scratch<S> {
    fn new(cfg: &ModelConfig) -> Self {
        Scratch {
            x: vec![S::zero(); cfg.input_dim()],
            a1: vec![S::zero(); cfg.hidden_dim],
            logits: vec![S::zero(); cfg.vocab_size],
            probs: vec![S::zero(); cfg.vocab_size],
            lse: S::zero(),
        }
    }
}
