//! Run artifacts: the trajectory log and the run summary.
//!
//! Both files are JSON lines with a header line followed by payload. The
//! header line is the only place wall-clock values (creation timestamp,
//! elapsed milliseconds) are allowed; every other byte is a pure function
//! of config and seeds, so two identical runs produce files that differ at
//! most in their first line.
//!
//! * Trajectory: header, then one record per logged step.
//! * Summary: header, then exactly one body line with final metrics.

use super::{EvalReport, Mode, RunConfig, RunResult};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

pub const TRAJECTORY_FORMAT: &str = "hbo-trajectory";
pub const SUMMARY_FORMAT: &str = "hbo-summary";
pub const ARTIFACT_VERSION: u32 = 1;

/// Serializes possibly-infinite values (the sampling temperature) as the
/// string `"inf"`, since JSON has no infinity literal. Accepts numbers,
/// integer literals, and the strings `inf`/`+inf`/`infinity` on the way in.
pub(crate) mod extended_float {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct ExtendedFloat;

    impl Visitor<'_> for ExtendedFloat {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            write!(f, "a number or the string \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| E::custom(format!("not a float: {other:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtendedFloat)
    }
}

/// Milliseconds since the Unix epoch; the only clock read in this crate.
pub(crate) fn now_unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// First line of a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub format: String,
    pub version: u32,
    /// Creation time; the only non-deterministic field in the file.
    pub created_unix_ms: u64,
    pub label: String,
    pub method: String,
    pub mode: Mode,
    pub subset_count: usize,
    /// Group count per subset.
    pub group_counts: Vec<usize>,
    pub corpus_fingerprint: String,
    pub model: ModelConfig,
    pub config: RunConfig,
}

impl TrajectoryHeader {
    pub fn new<S: Scalar>(
        label: &str,
        corpus_fingerprint: &str,
        model: &ModelConfig,
        config: &RunConfig,
        result: &RunResult<S>,
    ) -> Self {
        TrajectoryHeader {
            format: TRAJECTORY_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            created_unix_ms: now_unix_ms(),
            label: label.to_string(),
            method: super::method_label(result.mode, result.temperature),
            mode: result.mode,
            subset_count: result.final_local_probs.len(),
            group_counts: result.final_local_probs.iter().map(Vec::len).collect(),
            corpus_fingerprint: corpus_fingerprint.to_string(),
            model: model.clone(),
            config: config.clone(),
        }
    }
}

/// One logged training step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    /// Sampled subset index.
    pub subset: usize,
    /// Sampled group index within the subset.
    pub group: usize,
    /// Training loss of this step's batch.
    pub loss: f64,
    pub global_probs: Vec<f64>,
    pub local_probs: Vec<Vec<f64>>,
    /// Per-subset rewards, present when the global actor updated here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_rewards: Option<Vec<f64>>,
    /// Per-subset-per-group rewards, present when local actors updated here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_rewards: Option<Vec<Vec<f64>>>,
    /// Held-out macro perplexity, present at eval steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_macro_ppl: Option<f64>,
}

pub fn write_trajectory<W: Write>(
    mut out: W,
    header: &TrajectoryHeader,
    records: &[TrajectoryRecord],
) -> Result<()> {
    write_json_line(&mut out, header)?;
    for r in records {
        write_json_line(&mut out, r)?;
    }
    Ok(())
}

pub fn read_trajectory<R: BufRead>(input: R) -> Result<(TrajectoryHeader, Vec<TrajectoryRecord>)> {
    let mut lines = input.lines().enumerate();
    let header: TrajectoryHeader = parse_header(lines.next(), TRAJECTORY_FORMAT)?;
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrajectoryRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
        records.push(record);
    }
    Ok((header, records))
}

/// First line of a summary file; wall-clock readings live here and only
/// here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryHeader {
    pub format: String,
    pub version: u32,
    pub created_unix_ms: u64,
    /// Wall-clock milliseconds of the training loop.
    pub wall_ms: u64,
}

impl SummaryHeader {
    pub fn new(wall_ms: u64) -> Self {
        SummaryHeader {
            format: SUMMARY_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            created_unix_ms: now_unix_ms(),
            wall_ms,
        }
    }
}

/// Second line of a summary file: the run's deterministic outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub method: String,
    pub mode: Mode,
    #[serde(with = "extended_float")]
    pub temperature: f64,
    pub corpus_fingerprint: String,
    pub effective_steps: usize,
    pub eval: EvalReport,
    pub final_global_probs: Vec<f64>,
    pub final_local_probs: Vec<Vec<f64>>,
    /// How many training batches each subset contributed.
    pub subset_draws: Vec<usize>,
    /// How many training batches each group contributed.
    pub group_draws: Vec<Vec<usize>>,
    pub model: ModelConfig,
    pub config: RunConfig,
}

impl RunSummary {
    pub fn from_result<S: Scalar>(
        label: &str,
        corpus_fingerprint: &str,
        model: &ModelConfig,
        config: &RunConfig,
        result: &RunResult<S>,
    ) -> Self {
        RunSummary {
            label: label.to_string(),
            method: super::method_label(result.mode, result.temperature),
            mode: result.mode,
            temperature: result.temperature,
            corpus_fingerprint: corpus_fingerprint.to_string(),
            effective_steps: result.effective_steps,
            eval: result.eval.clone(),
            final_global_probs: result.final_global_probs.clone(),
            final_local_probs: result.final_local_probs.clone(),
            subset_draws: result.subset_draws.clone(),
            group_draws: result.group_draws.clone(),
            model: model.clone(),
            config: config.clone(),
        }
    }
}

pub fn write_summary<W: Write>(
    mut out: W,
    header: &SummaryHeader,
    body: &RunSummary,
) -> Result<()> {
    write_json_line(&mut out, header)?;
    write_json_line(&mut out, body)?;
    Ok(())
}

pub fn read_summary<R: BufRead>(input: R) -> Result<(SummaryHeader, RunSummary)> {
    let mut lines = input.lines().enumerate();
    let header: SummaryHeader = parse_header(lines.next(), SUMMARY_FORMAT)?;
    let (idx, line) = lines
        .next()
        .ok_or_else(|| Error::Parse("summary has no body line".into()))?;
    let line = line?;
    let body: RunSummary = serde_json::from_str(&line)
        .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
    Ok((header, body))
}

fn write_json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    Ok(())
}

fn parse_header<T: serde::de::DeserializeOwned + HeaderLike>(
    first: Option<(usize, std::io::Result<String>)>,
    expected_format: &str,
) -> Result<T> {
    let (_, line) = first.ok_or_else(|| Error::Parse("empty file".into()))?;
    let header: T = serde_json::from_str(&line?)
        .map_err(|e| Error::Parse(format!("line 1: bad header: {e}")))?;
    if header.format() != expected_format {
        return Err(Error::Parse(format!(
            "line 1: expected format {expected_format:?}, found {:?}",
            header.format()
        )));
    }
    if header.version() != ARTIFACT_VERSION {
        return Err(Error::Parse(format!(
            "line 1: unsupported version {} (this build reads {})",
            header.version(),
            ARTIFACT_VERSION
        )));
    }
    Ok(header)
}

trait HeaderLike {
    fn format(&self) -> &str;
    fn version(&self) -> u32;
}

impl HeaderLike for TrajectoryHeader {
    fn format(&self) -> &str {
        &self.format
    }
    fn version(&self) -> u32 {
        self.version
    }
}

impl HeaderLike for SummaryHeader {
    fn format(&self) -> &str {
        &self.format
    }
    fn version(&self) -> u32 {
        self.version
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<TrajectoryRecord> {
        vec![
            TrajectoryRecord {
                step: 0,
                subset: 1,
                group: 0,
                loss: 2.1,
                global_probs: vec![0.5, 0.5],
                local_probs: vec![vec![0.5, 0.5], vec![0.25, 0.75]],
                global_rewards: Some(vec![0.4, 0.9]),
                local_rewards: Some(vec![vec![1.0, 0.98], vec![1.01, 0.97]]),
                eval_macro_ppl: None,
            },
            TrajectoryRecord {
                step: 20,
                subset: 0,
                group: 1,
                loss: 1.9,
                global_probs: vec![0.6, 0.4],
                local_probs: vec![vec![0.55, 0.45], vec![0.2, 0.8]],
                global_rewards: None,
                local_rewards: None,
                eval_macro_ppl: Some(7.25),
            },
        ]
    }

    fn sample_header(created: u64) -> TrajectoryHeader {
        TrajectoryHeader {
            format: TRAJECTORY_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            created_unix_ms: created,
            label: "demo".to_string(),
            method: "HBO".to_string(),
            mode: Mode::Hbo,
            subset_count: 2,
            group_counts: vec![2, 2],
            corpus_fingerprint: "sha256:abc".to_string(),
            model: ModelConfig::default(),
            config: RunConfig::default(),
        }
    }

    fn sample_summary() -> RunSummary {
        RunSummary {
            label: "demo".to_string(),
            method: "Prop.".to_string(),
            mode: Mode::Static,
            temperature: 1.0,
            corpus_fingerprint: "sha256:abc".to_string(),
            effective_steps: 100,
            eval: EvalReport::from_per_subset(vec![2.0, 4.0], vec![0.69, 1.38]).unwrap(),
            final_global_probs: vec![0.9, 0.1],
            final_local_probs: vec![vec![1.0], vec![1.0]],
            subset_draws: vec![88, 12],
            group_draws: vec![vec![88], vec![12]],
            model: ModelConfig::default(),
            config: RunConfig::default(),
        }
    }

    #[test]
    fn trajectory_round_trips() {
        let mut bytes = Vec::new();
        write_trajectory(&mut bytes, &sample_header(123), &sample_records()).unwrap();
        let (header, records) = read_trajectory(&bytes[..]).unwrap();
        assert_eq!(header, sample_header(123));
        assert_eq!(records, sample_records());
    }

    #[test]
    fn summary_round_trips() {
        let mut bytes = Vec::new();
        write_summary(&mut bytes, &SummaryHeader::new(4200), &sample_summary()).unwrap();
        let (header, body) = read_summary(&bytes[..]).unwrap();
        assert_eq!(header.wall_ms, 4200);
        assert_eq!(body, sample_summary());
    }

    #[test]
    fn timestamp_differences_stay_in_the_header_line() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trajectory(&mut a, &sample_header(1), &sample_records()).unwrap();
        write_trajectory(&mut b, &sample_header(2), &sample_records()).unwrap();
        let a = String::from_utf8(a).unwrap();
        let b = String::from_utf8(b).unwrap();
        let tail = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_ne!(a.lines().next(), b.lines().next());
        assert_eq!(tail(&a), tail(&b));
    }

    #[test]
    fn infinite_temperature_survives_json() {
        let mut summary = sample_summary();
        summary.temperature = f64::INFINITY;
        summary.config.temperature = f64::INFINITY;
        let mut bytes = Vec::new();
        write_summary(&mut bytes, &SummaryHeader::new(0), &summary).unwrap();
        let (_, body) = read_summary(&bytes[..]).unwrap();
        assert!(body.temperature.is_infinite());
        assert!(body.config.temperature.is_infinite());
    }

    #[test]
    fn corrupt_lines_report_numbers() {
        let mut bytes = Vec::new();
        write_trajectory(&mut bytes, &sample_header(5), &sample_records()).unwrap();
        let mut text = String::from_utf8(bytes).unwrap();
        let start = text
            .char_indices()
            .filter(|&(_, c)| c == '\n')
            .nth(1)
            .map(|(i, _)| i + 1)
            .unwrap();
        text.insert_str(start, "garbage ");
        let err = read_trajectory(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn wrong_format_or_version_is_rejected() {
        let mut bytes = Vec::new();
        write_summary(&mut bytes, &SummaryHeader::new(0), &sample_summary()).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let wrong = text.replacen(SUMMARY_FORMAT, "hbo-other", 1);
        assert!(read_summary(wrong.as_bytes()).is_err());
        let wrong = text.replacen("\"version\":1", "\"version\":7", 1);
        assert!(read_summary(wrong.as_bytes()).is_err());
        assert!(read_trajectory(text.as_bytes()).is_err());
        assert!(read_summary(&b""[..]).is_err());
    }
}
