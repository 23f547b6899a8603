//! The headline mixture as plain library calls: three subsets where the
//! smallest is hardest, scheduled by the full bilevel loop.

use hbo_core::driver::{self, RunConfig, Seeds};
use hbo_core::mixture::generate::{generate_synthetic_mixture, SubsetSpec};
use hbo_core::model::ModelConfig;

fn main() -> hbo_core::Result<()> {
    let specs = vec![
        SubsetSpec::markov(0.15, 10_000, 0.25),
        SubsetSpec::markov(0.40, 2_000, 0.25),
        SubsetSpec::markov(0.65, 500, 0.25),
    ];
    let corpus = generate_synthetic_mixture(&specs, 64, 42)?;

    let model_cfg = ModelConfig { vocab_size: 64, ..ModelConfig::default() };
    let cfg = RunConfig {
        seeds: Seeds { corpus: 42, train: 1, reward: 102 },
        ..RunConfig::default()
    };

    let prep = driver::prepare::<f64>(&corpus, &model_cfg, &cfg)?;
    let result = driver::run_hbo::<f64>(&prep, &model_cfg, &cfg)?;
    println!("macro ppl {:.4}", result.eval.macro_ppl);
    println!("final subset probabilities {:?}", result.final_global_probs);
    Ok(())
}
