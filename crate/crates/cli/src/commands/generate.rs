//! `hbo generate <config> <out>`: build the synthetic corpus described by
//! the config's `[corpus]` section and write it to a file. Generation is a
//! pure function of the specs and seed, so repeated invocations produce
//! identical bytes.

use crate::config::ExperimentConfig;
use crate::error::Result;
use hbo_core::mixture::io::{corpus_fingerprint, save_corpus};
use std::path::Path;

pub fn generate(config_path: &Path, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let corpus = cfg.generate_corpus()?;
    let fingerprint = corpus_fingerprint(&corpus)?;
    save_corpus(out, &corpus)?;
    println!(
        "wrote {}: {} subsets, {} examples, vocab {}, fingerprint {}",
        out.display(),
        corpus.subset_count(),
        corpus.total_examples(),
        corpus.vocab_size(),
        fingerprint
    );
    Ok(())
}
