//! End-to-end tests of the `hbo` binary: each subcommand is exercised
//! through real config files, real artifacts, and real process exits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_hbo");

/// A small experiment that runs in a fraction of a second: two Markov
/// subsets (120 and 60 examples), a tiny model, 60 steps with sweeps
/// every 20.
fn config(label: &str, seeds: &str, corpus_seed: u64, run_extra: &str) -> String {
    format!(
        r#"[experiment]
label = "{label}"
output_dir = "out"
seeds = {seeds}

[corpus]
vocab_size = 16
seed = {corpus_seed}

[[corpus.subsets]]
generator = "markov-chain"
transition_entropy = 0.2
size = 120
hard_fraction = 0.25

[[corpus.subsets]]
generator = "markov-chain"
transition_entropy = 0.5
size = 60
hard_fraction = 0.25

[model]
vocab_size = 16
context_window = 3
embed_dim = 4
hidden_dim = 8

[run]
steps = 60
global_period = 20
local_period = 20
group_count = 2
batch_size = 4
reward_batch_size = 8
eval_every = 30
log_every = 10
{run_extra}

[run.scorer]
warmup_steps = 10
warmup_batch_size = 8
"#
    )
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn hbo(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary launches")
}

fn assert_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout:\n{}stderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_fails_with(out: &Output, class: &str) -> String {
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(
        !out.status.success(),
        "expected failure, got exit 0\nstdout:\n{}",
        String::from_utf8_lossy(&out.stdout),
    );
    assert!(stderr.contains(&format!("error[{class}]")), "{stderr}");
    stderr
}

/// Everything after the first line, which is the only place timestamps
/// may appear.
fn body(bytes: &[u8]) -> &[u8] {
    let cut = bytes.iter().position(|&b| b == b'\n').map_or(0, |i| i + 1);
    &bytes[cut..]
}

fn summary_body(run_dir: &Path) -> serde_json::Value {
    let text = fs::read_to_string(run_dir.join("summary.json")).unwrap();
    let (_, body) = text.split_once('\n').expect("summary has a header line");
    serde_json::from_str(body).expect("summary body parses")
}

#[test]
fn generate_writes_identical_corpora_for_identical_configs() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &config("gen", "[]", 7, ""));

    let stdout = assert_ok(&hbo(tmp.path(), &["generate", "exp.toml", "a.bin"]));
    assert!(stdout.contains("fingerprint sha256:"), "{stdout}");
    assert_ok(&hbo(tmp.path(), &["generate", "exp.toml", "b.bin"]));

    let a = fs::read(tmp.path().join("a.bin")).unwrap();
    let b = fs::read(tmp.path().join("b.bin")).unwrap();
    assert!(!a.is_empty());
    assert!(
        a == b,
        "regenerated corpus differs: {} vs {} bytes",
        a.len(),
        b.len()
    );
}

#[test]
fn generate_names_the_missing_field() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "bad.toml",
        "[corpus]\n[[corpus.subsets]]\ngenerator = \"markov-chain\"\nsize = 100\n",
    );

    let out = hbo(tmp.path(), &["generate", "bad.toml", "c.bin"]);
    let stderr = assert_fails_with(&out, "invalid-config");
    assert!(stderr.contains("transition_entropy"), "{stderr}");
    assert!(!tmp.path().join("c.bin").exists());
}

#[test]
fn run_writes_config_echo_trajectory_summary_and_checkpoint() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &config("art", "[1]", 7, ""));

    let stdout = assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));
    assert!(stdout.contains("HBO seed 1: macro ppl"), "{stdout}");

    let run_dir = tmp.path().join("out/art/hbo-seed1");
    for file in [
        "config.toml",
        "trajectory.jsonl",
        "summary.json",
        "checkpoint/manifest.json",
        "checkpoint/tensors.bin",
    ] {
        assert!(run_dir.join(file).is_file(), "missing {file}");
    }

    let summary = summary_body(&run_dir);
    assert_eq!(summary["method"], "HBO");
    assert_eq!(summary["label"], "art");
    assert_eq!(summary["effective_steps"], 60);
    assert_eq!(summary["eval"]["per_subset_ppl"].as_array().unwrap().len(), 2);
    assert!(summary["eval"]["macro_ppl"].as_f64().unwrap() > 1.0);

    // The echoed config is itself loadable and pins the resolved seeds.
    let echo = fs::read_to_string(run_dir.join("config.toml")).unwrap();
    assert!(echo.contains("train = 1"), "{echo}");
    assert!(echo.contains("seeds = []"), "{echo}");
}

#[test]
fn rerunning_a_config_reproduces_artifacts_byte_for_byte() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &config("rep", "[1]", 7, ""));
    let run_dir = tmp.path().join("out/rep/hbo-seed1");
    let read = |name: &str| fs::read(run_dir.join(name)).unwrap();

    assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));
    let first: Vec<Vec<u8>> = [
        "config.toml",
        "trajectory.jsonl",
        "summary.json",
        "checkpoint/manifest.json",
        "checkpoint/tensors.bin",
    ]
    .iter()
    .map(|n| read(n))
    .collect();

    assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));

    // The config echo and checkpoint carry no timestamps at all; the
    // trajectory and summary confine them to their header line.
    assert!(read("config.toml") == first[0], "config echo changed");
    assert!(
        body(&read("trajectory.jsonl")) == body(&first[1]),
        "trajectory body changed"
    );
    assert!(
        body(&read("summary.json")) == body(&first[2]),
        "summary body changed"
    );
    assert!(read("checkpoint/manifest.json") == first[3], "manifest changed");
    assert!(read("checkpoint/tensors.bin") == first[4], "tensors changed");
}

#[test]
fn static_temperature_ten_is_labeled_temp() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "exp.toml",
        &config("base", "[1]", 7, "mode = \"static\"\ntemperature = 10.0"),
    );

    let stdout = assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));
    assert!(stdout.contains("Temp. seed 1:"), "{stdout}");
    let summary = summary_body(&tmp.path().join("out/base/temp-seed1"));
    assert_eq!(summary["method"], "Temp.");
    assert_eq!(summary["temperature"], 10.0);
}

#[test]
fn zero_temperature_is_rejected_before_any_run_starts() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "exp.toml",
        &config("base", "[1]", 7, "mode = \"static\"\ntemperature = 0.0"),
    );

    let out = hbo(tmp.path(), &["run", "exp.toml"]);
    let stderr = assert_fails_with(&out, "invalid-config");
    assert!(stderr.contains("temperature"), "{stderr}");
    assert!(!tmp.path().join("out").exists(), "failed run left output behind");
}

#[test]
fn compare_reports_signed_paired_differences() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "hbo.toml", &config("duel", "[1, 2]", 7, ""));
    write_config(
        tmp.path(),
        "prop.toml",
        &config("duel", "[1, 2]", 7, "mode = \"static\"\ntemperature = 1.0"),
    );

    assert_ok(&hbo(tmp.path(), &["run", "hbo.toml"]));
    assert_ok(&hbo(tmp.path(), &["run", "prop.toml"]));
    let stdout = assert_ok(&hbo(tmp.path(), &["compare", "hbo.toml"]));

    assert!(stdout.contains("4 runs, 2 methods, seeds [1, 2]"), "{stdout}");
    assert!(stdout.contains("macro-ppl (mean+-std)"), "{stdout}");
    assert!(stdout.contains("paired macro-ppl differences"), "{stdout}");
    let diff = stdout
        .lines()
        .find(|l| l.contains(": mean "))
        .unwrap_or_else(|| panic!("no paired difference line\n{stdout}"));
    assert!(diff.contains("HBO") && diff.contains("Prop."), "{diff}");
    assert!(
        diff.contains(": mean +") || diff.contains(": mean -"),
        "difference has no sign: {diff}"
    );
    assert!(diff.contains("per seed ["), "{diff}");
}

#[test]
fn methods_with_identical_draws_compare_to_zero() {
    // tau = 1e300 rounds every size^(1/tau) to exactly 1, so the run is
    // bit-identical to tau = inf while keeping a distinct method label.
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "uni.toml",
        &config("zeros", "[1, 2]", 7, "mode = \"static\"\ntemperature = \"inf\""),
    );
    write_config(
        tmp.path(),
        "big.toml",
        &config("zeros", "[1, 2]", 7, "mode = \"static\"\ntemperature = 1e300"),
    );

    assert_ok(&hbo(tmp.path(), &["run", "uni.toml"]));
    assert_ok(&hbo(tmp.path(), &["run", "big.toml"]));
    let stdout = assert_ok(&hbo(tmp.path(), &["compare", "uni.toml"]));

    assert!(stdout.contains("Uni."), "{stdout}");
    assert!(stdout.contains("Static(tau=1e300)"), "{stdout}");
    assert!(stdout.contains(": mean +0.0000"), "{stdout}");
    assert!(stdout.contains("per seed [0.0, 0.0]"), "{stdout}");
}

#[test]
fn compare_refuses_runs_on_different_corpora() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "a.toml", &config("mix", "[1]", 7, ""));
    write_config(
        tmp.path(),
        "b.toml",
        &config("mix", "[1]", 8, "mode = \"static\"\ntemperature = 1.0"),
    );

    assert_ok(&hbo(tmp.path(), &["run", "a.toml"]));
    assert_ok(&hbo(tmp.path(), &["run", "b.toml"]));
    let out = hbo(tmp.path(), &["compare", "a.toml"]);
    assert_fails_with(&out, "mismatched-corpora");
}

/// A third subset and four groups for the column-shape test.
fn wide_config() -> String {
    let mut text = config("plot", "[1]", 7, "");
    text = text.replace("group_count = 2", "group_count = 4");
    text.push_str(
        "\n[[corpus.subsets]]\ngenerator = \"markov-chain\"\n\
         transition_entropy = 0.8\nsize = 90\nhard_fraction = 0.25\n",
    );
    text
}

#[test]
fn plotdata_emits_one_column_per_probability_and_reward() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &wide_config());
    assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));

    let stdout = assert_ok(&hbo(
        tmp.path(),
        &["plotdata", "out/plot/hbo-seed1/trajectory.jsonl"],
    ));
    let mut lines = stdout.lines();
    let header: Vec<&str> = lines.next().expect("header row").split(',').collect();

    // Three subsets at four groups each: 3 global + 12 local probability
    // columns, mirrored for rewards, plus step, loss, and eval.
    let count = |prefix: &str| header.iter().filter(|c| c.starts_with(prefix)).count();
    assert_eq!(header[0], "step");
    assert_eq!(header[1], "loss");
    assert_eq!(count("global_prob_"), 3, "{header:?}");
    assert_eq!(count("local_prob_"), 12, "{header:?}");
    assert_eq!(count("global_reward_"), 3, "{header:?}");
    assert_eq!(count("local_reward_"), 12, "{header:?}");
    assert_eq!(*header.last().unwrap(), "eval_macro_ppl");
    assert_eq!(header.len(), 33);

    let col = |name: &str| header.iter().position(|c| *c == name).unwrap();
    let mut saw_sweep = false;
    let mut saw_quiet = false;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len(), "ragged row: {line}");

        // Each actor's probabilities are a distribution on every row.
        let sum = |names: &[String]| -> f64 {
            names.iter().map(|n| cells[col(n)].parse::<f64>().unwrap()).sum()
        };
        let globals: Vec<String> = (0..3).map(|i| format!("global_prob_{i}")).collect();
        assert!((sum(&globals) - 1.0).abs() < 1e-6, "{line}");
        for i in 0..3 {
            let locals: Vec<String> =
                (0..4).map(|j| format!("local_prob_{i}_{j}")).collect();
            assert!((sum(&locals) - 1.0).abs() < 1e-6, "{line}");
        }

        // Reward cells are present exactly on sweep rows, empty elsewhere.
        let reward = cells[col("global_reward_0")];
        let step: usize = cells[0].parse().unwrap();
        if step % 20 == 0 {
            assert!(!reward.is_empty(), "sweep row without rewards: {line}");
            saw_sweep = true;
        } else {
            assert!(reward.is_empty(), "quiet row with rewards: {line}");
            saw_quiet = true;
        }
    }
    assert!(saw_sweep && saw_quiet, "trajectory rows did not cover both cases");
}

#[test]
fn plotdata_on_a_header_only_trajectory_prints_just_the_header() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &config("empty", "[1]", 7, ""));
    assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));

    let path = tmp.path().join("out/empty/hbo-seed1/trajectory.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let (header, _) = text.split_once('\n').unwrap();
    fs::write(&path, format!("{header}\n")).unwrap();

    let stdout = assert_ok(&hbo(
        tmp.path(),
        &["plotdata", "out/empty/hbo-seed1/trajectory.jsonl"],
    ));
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1, "{stdout}");
    assert!(lines[0].starts_with("step,loss,global_prob_0"), "{stdout}");
}

#[test]
fn plotdata_reports_corrupt_lines_by_number() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "exp.toml", &config("corrupt", "[1]", 7, ""));
    assert_ok(&hbo(tmp.path(), &["run", "exp.toml"]));

    let path = tmp.path().join("out/corrupt/hbo-seed1/trajectory.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let (header, _) = text.split_once('\n').unwrap();
    fs::write(&path, format!("{header}\n{{not json\n")).unwrap();

    let out = hbo(tmp.path(), &["plotdata", "out/corrupt/hbo-seed1/trajectory.jsonl"]);
    let stderr = assert_fails_with(&out, "parse");
    assert!(stderr.contains("line 2"), "{stderr}");
}
