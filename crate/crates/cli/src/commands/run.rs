//! `hbo run <config>`: execute the configured experiment and write one
//! directory per run.
//!
//! Sweep seeds run as independent parallel runs. Each run directory holds
//! the fully resolved config echo (`config.toml`), the step log
//! (`trajectory.jsonl`), final metrics (`summary.json`), and the trained
//! model and actors (`checkpoint/`). Reruns overwrite in place and, apart
//! from the wall-clock header line of the two log files, reproduce the same
//! bytes.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use hbo_core::driver::{
    method_label, prepare, run_ablation, run_hbo, run_static, write_summary, write_trajectory,
    Mode, RunResult, RunSummary, SummaryHeader, TrajectoryHeader,
};
use hbo_core::mixture::io::corpus_fingerprint;
use hbo_core::mixture::MixtureCorpus;
use hbo_core::model::checkpoint::save_checkpoint;
use rayon::prelude::*;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub fn run(config_path: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    // Surface recipe problems before any expensive work.
    cfg.model.validate()?;
    let seeds = cfg.sweep_seeds();
    for &seed in &seeds {
        cfg.resolved_run(seed).validate()?;
    }

    let corpus = cfg.corpus()?;
    let fingerprint = corpus_fingerprint(&corpus)?;
    let label_dir = cfg.experiment.output_dir.join(&cfg.experiment.label);
    std::fs::create_dir_all(&label_dir).map_err(|e| CliError::io(&label_dir, e))?;

    let outcomes: Vec<Result<String>> = seeds
        .par_iter()
        .map(|&seed| execute_one(&cfg, &corpus, &fingerprint, &label_dir, seed))
        .collect();
    for line in outcomes {
        println!("{}", line?);
    }
    Ok(())
}

fn execute_one(
    cfg: &ExperimentConfig,
    corpus: &MixtureCorpus,
    fingerprint: &str,
    label_dir: &Path,
    seed: u64,
) -> Result<String> {
    let run_cfg = cfg.resolved_run(seed);
    let prep = prepare::<f64>(corpus, &cfg.model, &run_cfg)?;
    let result: RunResult<f64> = match run_cfg.mode {
        Mode::Hbo => run_hbo(&prep, &cfg.model, &run_cfg)?,
        Mode::Static => run_static(&prep, &cfg.model, &run_cfg, run_cfg.temperature)?,
        Mode::GlobalOnly | Mode::LocalOnly => run_ablation(&prep, &cfg.model, &run_cfg)?,
    };

    let method = method_label(result.mode, result.temperature);
    let dir = label_dir.join(format!("{}-seed{}", dir_token(&method), run_cfg.seeds.train));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let echo = toml::to_string_pretty(&cfg.echo_for(&run_cfg))
        .map_err(|e| CliError::new("internal-contract", format!("config echo: {e}")))?;
    let echo_path = dir.join("config.toml");
    std::fs::write(&echo_path, echo).map_err(|e| CliError::io(&echo_path, e))?;

    let traj_path = dir.join("trajectory.jsonl");
    let out = File::create(&traj_path).map_err(|e| CliError::io(&traj_path, e))?;
    let header =
        TrajectoryHeader::new(&cfg.experiment.label, fingerprint, &cfg.model, &run_cfg, &result);
    write_trajectory(BufWriter::new(out), &header, &result.trajectory)?;

    let summary_path = dir.join("summary.json");
    let out = File::create(&summary_path).map_err(|e| CliError::io(&summary_path, e))?;
    let summary =
        RunSummary::from_result(&cfg.experiment.label, fingerprint, &cfg.model, &run_cfg, &result);
    write_summary(BufWriter::new(out), &SummaryHeader::new(result.wall_ms), &summary)?;

    save_checkpoint(
        &dir.join("checkpoint"),
        &result.model,
        result.global_actor.as_ref(),
        &result.local_actors,
    )?;

    Ok(format!(
        "{method} seed {}: macro ppl {:.4}, {} steps, {}ms -> {}",
        run_cfg.seeds.train,
        result.eval.macro_ppl,
        result.effective_steps,
        result.wall_ms,
        dir.display()
    ))
}

/// Filesystem-safe token for a method label ("Prop." -> "prop",
/// "Static(tau=2.5)" -> "static-tau-2-5").
fn dir_token(method: &str) -> String {
    let mut out = String::new();
    for c in method.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}
