//! Hierarchical balancing optimization for training-data mixtures.
//!
//! This crate trains a small built-in language model while two levels of
//! learned samplers decide where each training batch comes from: a global
//! actor picks a subset of the corpus, and one local actor per subset picks
//! a difficulty group inside it. Both actors are tiny softmax policies
//! updated by episodic reinforcement from rewards measured on the training
//! model itself, so the data mixture adapts to the model instead of staying
//! fixed.
//!
//! The pieces compose bottom-up:
//!
//! * [`mixture`]: synthetic corpora, temperature sampling, difficulty
//!   scoring and grouping, corpus files.
//! * [`model`]: the toy context-window language model, exact gradients, and
//!   its optimizers and checkpoints.
//! * [`actors`]: the softmax policy networks and their reinforcement
//!   update.
//! * [`rewards`]: the signals that drive the actors (gradient norms,
//!   hidden-state alignment, perplexity ratios).
//! * [`driver`]: the training loop gluing everything together plus run
//!   artifacts.
//!
//! Everything numeric is generic over the scalar type through [`Scalar`];
//! `f64` is the reference precision and `f32` is available for speed.
//! Aliases like [`ToyLanguageModel64`] pick a precision at the crate root.
//! All randomness flows from one run seed through named, independent
//! [`rng`] streams, so every run is exactly reproducible.

pub mod actors;
pub mod driver;
pub mod error;
pub mod mixture;
pub mod model;
pub mod rewards;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Single-precision model.
pub type ToyLanguageModel32 = model::ToyLanguageModel<f32>;
/// Double-precision model.
pub type ToyLanguageModel64 = model::ToyLanguageModel<f64>;
/// Single-precision parameter/gradient bundle.
pub type Parameters32 = model::Parameters<f32>;
/// Double-precision parameter/gradient bundle.
pub type Parameters64 = model::Parameters<f64>;
/// Single-precision frozen model snapshot.
pub type ModelSnapshot32 = model::ModelSnapshot<f32>;
/// Double-precision frozen model snapshot.
pub type ModelSnapshot64 = model::ModelSnapshot<f64>;
/// Single-precision policy network.
pub type ActorNetwork32 = actors::ActorNetwork<f32>;
/// Double-precision policy network.
pub type ActorNetwork64 = actors::ActorNetwork<f64>;
