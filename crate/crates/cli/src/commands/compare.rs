//! `hbo compare <config>`: read every completed run under the config's
//! label and report per-method macro metrics plus paired per-seed
//! differences.
//!
//! All runs must cover the same corpus (fingerprints are cross-checked) and
//! every method must have run the same seed list, otherwise the comparison
//! would not be paired and the command refuses. The report is plain text on
//! stdout and contains no wall-clock values, so it is reproducible.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use hbo_core::driver::{read_summary, RunSummary};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub fn compare(config_path: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let label_dir = cfg.experiment.output_dir.join(&cfg.experiment.label);
    let summaries = load_summaries(&label_dir)?;
    if summaries.len() < 2 {
        return Err(CliError::new(
            "invalid-state",
            format!(
                "need at least two completed runs under {}, found {}",
                label_dir.display(),
                summaries.len()
            ),
        ));
    }

    let reference = &summaries[0].corpus_fingerprint;
    if let Some(other) = summaries
        .iter()
        .find(|s| &s.corpus_fingerprint != reference)
    {
        return Err(CliError::new(
            "mismatched-corpora",
            format!(
                "runs cover different corpora (fingerprints {} and {}); compare only runs over \
                 one corpus",
                &reference[..12.min(reference.len())],
                &other.corpus_fingerprint[..12.min(other.corpus_fingerprint.len())]
            ),
        ));
    }

    // Method -> train seed -> summary; directory names keep them unique.
    let mut methods: BTreeMap<&str, BTreeMap<u64, &RunSummary>> = BTreeMap::new();
    for s in &summaries {
        methods
            .entry(&s.method)
            .or_default()
            .insert(s.config.seeds.train, s);
    }
    let seed_lists: Vec<Vec<u64>> = methods
        .values()
        .map(|runs| runs.keys().copied().collect())
        .collect();
    if !seed_lists.windows(2).all(|w| w[0] == w[1]) {
        let detail: Vec<String> = methods
            .iter()
            .map(|(m, runs)| format!("{m}: {:?}", runs.keys().collect::<Vec<_>>()))
            .collect();
        return Err(CliError::new(
            "invalid-state",
            format!(
                "methods do not share a seed list, so differences cannot be paired ({})",
                detail.join("; ")
            ),
        ));
    }

    println!(
        "{} runs, {} methods, seeds {:?}, corpus {}",
        summaries.len(),
        methods.len(),
        seed_lists[0],
        &reference[..12.min(reference.len())]
    );
    println!();
    println!("{:<18} {:>5} {:>22} {:>12}", "method", "seeds", "macro-ppl (mean+-std)", "macro-loss");
    let mut ranked: Vec<(&str, Vec<f64>, Vec<f64>)> = methods
        .iter()
        .map(|(m, runs)| {
            let ppls: Vec<f64> = runs.values().map(|s| s.eval.macro_ppl).collect();
            let losses: Vec<f64> = runs.values().map(|s| s.eval.macro_loss).collect();
            (*m, ppls, losses)
        })
        .collect();
    ranked.sort_by(|a, b| mean(&a.1).total_cmp(&mean(&b.1)).then(a.0.cmp(b.0)));
    for (method, ppls, losses) in &ranked {
        println!(
            "{:<18} {:>5} {:>14.4} +- {:.4} {:>12.4}",
            method,
            ppls.len(),
            mean(ppls),
            stddev(ppls),
            mean(losses)
        );
    }

    println!();
    println!("paired macro-ppl differences (first minus second, per seed):");
    for i in 0..ranked.len() {
        for j in (i + 1)..ranked.len() {
            let (a, a_ppls, _) = &ranked[i];
            let (b, b_ppls, _) = &ranked[j];
            let diffs: Vec<f64> = a_ppls.iter().zip(b_ppls).map(|(x, y)| x - y).collect();
            println!(
                "{a} - {b}: mean {:+.4}, per seed {:?}",
                mean(&diffs),
                diffs.iter().map(|d| round4(*d)).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}

fn load_summaries(label_dir: &Path) -> Result<Vec<RunSummary>> {
    let entries = std::fs::read_dir(label_dir).map_err(|e| CliError::io(label_dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path().join("summary.json"))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut summaries = Vec::new();
    for path in paths {
        let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        let (_, summary) = read_summary(BufReader::new(file))?;
        summaries.push(summary);
    }
    Ok(summaries)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for a single observation.
fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}
