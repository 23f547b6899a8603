//! Corpus serialization: JSON lines, one header then one example per line.
//!
//! The header carries the format name, version and corpus totals; examples
//! follow in subset-major, group-major order. Nothing in the file depends on
//! wall-clock time or machine, so the same corpus always serializes to the
//! same bytes, and [`corpus_fingerprint`] hashes those bytes into a stable
//! identity that run artifacts can cross-check.

use super::{ExampleRecord, MixtureCorpus};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const CORPUS_FORMAT: &str = "hbo-corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CorpusHeader {
    format: String,
    version: u32,
    vocab_size: usize,
    subset_count: usize,
    example_count: usize,
}

/// Writes the corpus in its line format.
pub fn write_corpus<W: Write>(mut out: W, corpus: &MixtureCorpus) -> Result<()> {
    let header = CorpusHeader {
        format: CORPUS_FORMAT.to_string(),
        version: CORPUS_VERSION,
        vocab_size: corpus.vocab_size(),
        subset_count: corpus.subset_count(),
        example_count: corpus.total_examples(),
    };
    serde_json::to_writer(&mut out, &header).map_err(io_write)?;
    out.write_all(b"\n")?;
    for e in corpus.iter_all() {
        serde_json::to_writer(&mut out, e).map_err(io_write)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn io_write(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads a corpus back, reporting the 1-based line number of any bad line.
pub fn read_corpus<R: BufRead>(input: R) -> Result<MixtureCorpus> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty corpus file".into()))?;
    let header: CorpusHeader = serde_json::from_str(&first?)
        .map_err(|e| Error::Parse(format!("line 1: bad header: {e}")))?;
    if header.format != CORPUS_FORMAT {
        return Err(Error::Parse(format!(
            "line 1: expected format {CORPUS_FORMAT:?}, found {:?}",
            header.format
        )));
    }
    if header.version != CORPUS_VERSION {
        return Err(Error::Parse(format!(
            "line 1: unsupported corpus version {} (this build reads {})",
            header.version, CORPUS_VERSION
        )));
    }

    let mut records: Vec<ExampleRecord> = Vec::with_capacity(header.example_count);
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExampleRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
        records.push(record);
    }
    if records.len() != header.example_count {
        return Err(Error::Parse(format!(
            "header promises {} examples, file holds {}",
            header.example_count,
            records.len()
        )));
    }
    assemble(header, records)
}

fn assemble(header: CorpusHeader, records: Vec<ExampleRecord>) -> Result<MixtureCorpus> {
    if header.subset_count == 0 {
        return Err(Error::Parse("header declares zero subsets".into()));
    }
    let grouped_flags: Vec<bool> = records.iter().map(|r| r.group_id.is_some()).collect();
    let grouped = match (grouped_flags.iter().all(|&g| g), grouped_flags.iter().any(|&g| g)) {
        (true, _) => true,
        (false, false) => false,
        _ => {
            return Err(Error::Parse(
                "corpus mixes grouped and ungrouped examples".into(),
            ))
        }
    };

    if grouped {
        let group_count = records
            .iter()
            .map(|r| r.group_id.unwrap() + 1)
            .max()
            .unwrap_or(0);
        let mut per: Vec<Vec<Vec<ExampleRecord>>> =
            vec![vec![Vec::new(); group_count]; header.subset_count];
        for r in records {
            let (s, g) = (r.subset_id, r.group_id.unwrap());
            if s >= header.subset_count {
                return Err(Error::Parse(format!(
                    "example names subset {s}, header declares {}",
                    header.subset_count
                )));
            }
            per[s][g].push(r);
        }
        MixtureCorpus::from_groups(header.vocab_size, per)
    } else {
        let mut per: Vec<Vec<ExampleRecord>> = vec![Vec::new(); header.subset_count];
        for r in records {
            let s = r.subset_id;
            if s >= header.subset_count {
                return Err(Error::Parse(format!(
                    "example names subset {s}, header declares {}",
                    header.subset_count
                )));
            }
            per[s].push(r);
        }
        MixtureCorpus::from_examples(header.vocab_size, per)
    }
}

/// Writes the corpus to a file.
pub fn save_corpus<P: AsRef<Path>>(path: P, corpus: &MixtureCorpus) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_corpus(&mut w, corpus)?;
    w.flush()?;
    Ok(())
}

/// Loads a corpus from a file.
pub fn load_corpus<P: AsRef<Path>>(path: P) -> Result<MixtureCorpus> {
    read_corpus(BufReader::new(File::open(path)?))
}

/// `sha256:<hex>` over the serialized corpus bytes.
pub fn corpus_fingerprint(corpus: &MixtureCorpus) -> Result<String> {
    let mut bytes = Vec::new();
    write_corpus(&mut bytes, corpus)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(7 + digest.len() * 2);
    hex.push_str("sha256:");
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}
