//! `hbo plotdata <trajectory>`: flatten a trajectory file into wide CSV on
//! stdout, one row per logged step and one column per sampling probability
//! and reward. Reward and evaluation cells are empty on steps where none
//! was computed. Column structure comes from the trajectory header, so an
//! empty trajectory still prints its header row.

use crate::error::{CliError, Result};
use hbo_core::driver::read_trajectory;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub fn plotdata(path: &Path) -> Result<()> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let (header, records) = read_trajectory(BufReader::new(file))?;

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let emit = |out: &mut dyn Write, row: &[String]| -> Result<()> {
        writeln!(out, "{}", row.join(",")).map_err(|e| CliError::new("io", format!("stdout: {e}")))
    };

    let mut columns = vec!["step".to_string(), "loss".to_string()];
    for i in 0..header.subset_count {
        columns.push(format!("global_prob_{i}"));
    }
    for (i, &k) in header.group_counts.iter().enumerate() {
        for j in 0..k {
            columns.push(format!("local_prob_{i}_{j}"));
        }
    }
    for i in 0..header.subset_count {
        columns.push(format!("global_reward_{i}"));
    }
    for (i, &k) in header.group_counts.iter().enumerate() {
        for j in 0..k {
            columns.push(format!("local_reward_{i}_{j}"));
        }
    }
    columns.push("eval_macro_ppl".to_string());
    emit(&mut out, &columns)?;

    let blank = String::new;
    for r in &records {
        let mut row = vec![r.step.to_string(), r.loss.to_string()];
        row.extend(r.global_probs.iter().map(f64::to_string));
        row.extend(r.local_probs.iter().flatten().map(f64::to_string));
        match &r.global_rewards {
            Some(gr) => row.extend(gr.iter().map(f64::to_string)),
            None => row.extend((0..header.subset_count).map(|_| blank())),
        }
        let local_cells: usize = header.group_counts.iter().sum();
        match &r.local_rewards {
            Some(lr) => row.extend(lr.iter().flatten().map(f64::to_string)),
            None => row.extend((0..local_cells).map(|_| blank())),
        }
        row.push(r.eval_macro_ppl.map(|p| p.to_string()).unwrap_or_default());
        emit(&mut out, &row)?;
    }
    Ok(())
}
