//! The experiment config file: one TOML document with a section per concern.
//!
//! Every field has a default, so an empty file already describes a valid
//! experiment (the built-in adversarial mixture under the default run
//! recipe). Sections:
//!
//! * `[experiment]`: label, output directory, and the sweep seed list.
//! * `[corpus]`: either inline `[[corpus.subsets]]` generation specs or a
//!   `file` to load; `seed` drives generation.
//! * `[model]`: the training model architecture.
//! * `[run]`: the full run recipe (mode, steps, actor periods and rates,
//!   batch sizes, rewards, seeds).
//!
//! Sweeps: when `experiment.seeds` is non-empty, one run per listed seed is
//! executed with `run.seeds.train = seed` and `run.seeds.reward = seed +
//! 101`; otherwise `run.seeds` is used verbatim for a single run. The
//! corpus generation seed always comes from `corpus.seed`.

use crate::error::{CliError, Result};
use hbo_core::driver::{RunConfig, Seeds};
use hbo_core::mixture::generate::{generate_synthetic_mixture, SubsetSpec};
use hbo_core::mixture::io::load_corpus;
use hbo_core::mixture::MixtureCorpus;
use hbo_core::model::ModelConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Offset between a sweep seed and the reward stream seed, so the two
/// streams never collide across the sweep.
pub const REWARD_SEED_OFFSET: u64 = 101;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub corpus: CorpusSection,
    pub model: ModelConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Groups this experiment's runs under one output subdirectory.
    pub label: String,
    pub output_dir: PathBuf,
    /// Training seeds for multi-seed sweeps; empty means one run with the
    /// seeds from `[run]`.
    pub seeds: Vec<u64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            label: "experiment".to_string(),
            output_dir: PathBuf::from("runs"),
            seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub vocab_size: usize,
    /// Generation seed; also recorded as the run's corpus seed.
    pub seed: u64,
    /// Load this corpus file instead of generating (run command only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub subsets: Vec<SubsetSpec>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            vocab_size: ModelConfig::default().vocab_size,
            seed: 42,
            file: None,
            // Three subsets where the smallest is also the hardest; the
            // setting the hierarchical schedule is built for.
            subsets: vec![
                SubsetSpec::markov(0.15, 10_000, 0.25),
                SubsetSpec::markov(0.40, 2_000, 0.25),
                SubsetSpec::markov(0.65, 500, 0.25),
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::invalid_config(format!("{}: {e}", path.display())))
    }

    /// Generates the corpus from the inline specs, ignoring `corpus.file`.
    pub fn generate_corpus(&self) -> Result<MixtureCorpus> {
        let c = &self.corpus;
        Ok(generate_synthetic_mixture(&c.subsets, c.vocab_size, c.seed)?)
    }

    /// The corpus a run trains on: the `corpus.file` if set, else generated.
    pub fn corpus(&self) -> Result<MixtureCorpus> {
        match &self.corpus.file {
            Some(path) => Ok(load_corpus(path)?),
            None => self.generate_corpus(),
        }
    }

    /// Training seeds of the sweep; `run.seeds.train` when no sweep is set.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        if self.experiment.seeds.is_empty() {
            vec![self.run.seeds.train]
        } else {
            self.experiment.seeds.clone()
        }
    }

    /// The fully resolved run recipe for one sweep seed.
    pub fn resolved_run(&self, train_seed: u64) -> RunConfig {
        let mut run = self.run.clone();
        run.seeds = Seeds {
            corpus: self.corpus.seed,
            train: train_seed,
            reward: if self.experiment.seeds.is_empty() {
                self.run.seeds.reward
            } else {
                train_seed + REWARD_SEED_OFFSET
            },
        };
        run
    }

    /// The config echoed into a run directory: this exact run, no sweep.
    pub fn echo_for(&self, run: &RunConfig) -> ExperimentConfig {
        let mut echo = self.clone();
        echo.experiment.seeds = Vec::new();
        echo.run = run.clone();
        echo
    }
}
