//! End-to-end subcommand checks against the built binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use corpus_forge::io::write_jsonl;
use corpus_forge::model::{Document, SourceKind};

const BIN: &str = env!("CARGO_BIN_EXE_corpus-forge");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_small_corpus(path: &Path) {
    let docs = vec![
        Document::new(
            "a",
            "hplt2",
            SourceKind::Web,
            "Ова е пристојна реченица на македонски јазик за тестот.\nВтората реченица исто така е сосема во ред.",
        ),
        Document::new(
            "b",
            "fineweb2",
            SourceKind::Web,
            "This page is clearly in English and the gate drops it.",
        ),
        Document::new("c", "hplt2", SourceKind::Web, "кратко\nбез крај"),
    ];
    write_jsonl(docs, path).unwrap();
}

#[test]
fn filter_runs_default_plan_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let output = dir.path().join("out.jsonl");
    let report = dir.path().join("report.json");

    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert!(output.exists());
    let report: corpus_forge::report::FunnelReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report.stages.len(), 7);
    let kept = std::fs::read_to_string(&output).unwrap();
    assert!(kept.contains("\"id\":\"a\""));
    assert!(!kept.contains("\"id\":\"b\""));
}

#[test]
fn filter_stage_subset_appears_alone_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let report = dir.path().join("report.json");

    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.jsonl").to_str().unwrap(),
        "--stages",
        "pii,c4",
        "--report",
        report.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(result.status.success());
    let report: corpus_forge::report::FunnelReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let names: Vec<&str> = report.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(names, vec!["pii", "c4"]);
}

#[test]
fn filter_reorder_requires_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let out = dir.path().join("out.jsonl");
    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--stages",
        "c4,pii",
        "--quiet",
    ]);
    assert!(!result.status.success());
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("reorder"));

    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--stages",
        "c4,pii",
        "--allow-reorder",
        "--quiet",
    ]);
    assert!(result.status.success());
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_jsonl(common::build_fixture(555, 200_000), &input).unwrap();

    let mut corpora = Vec::new();
    for name in ["one", "two"] {
        let out = dir.path().join(format!("{name}.jsonl"));
        let result = run(&[
            "filter",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--seed",
            "11",
            "--quiet",
        ]);
        assert!(result.status.success());
        corpora.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(corpora[0], corpora[1]);
}

#[test]
fn config_file_flags_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let config = dir.path().join("forge.toml");
    std::fs::write(
        &config,
        "seed = 3\n[dedup]\nminhash_permutations = 64\nlsh_bands = 16\nlsh_rows = 4\n",
    )
    .unwrap();

    // File value alone: valid 16x4=64 geometry.
    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("o1.jsonl").to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    // Flag overrides file: bands 10 breaks the geometry, config validation
    // rejects it.
    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("o2.jsonl").to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--bands",
        "10",
        "--quiet",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("lsh_bands"));
}

#[test]
fn unknown_flag_is_usage_error_exit_2() {
    let result = run(&["filter", "--bogus"]);
    assert_eq!(result.status.code(), Some(2));
    let result = run(&["not-a-subcommand"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_1_and_leaves_partial() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    // Dedup report directory does not exist: the write fails after the
    // corpus partial was already written.
    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.jsonl").to_str().unwrap(),
        "--dedup-report",
        dir.path().join("missing-dir/dedup.jsonl").to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!dir.path().join("out.jsonl").exists(), "no final output after failure");
    assert!(dir.path().join("out.jsonl.partial").exists(), "partial output is kept");
}

#[test]
fn stats_renders_source_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let result = run(&["stats", "--input", input.to_str().unwrap(), "--report-format", "csv"]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.starts_with("Source,Words,Percentage"));
    assert!(stdout.contains("hplt2"));
    assert!(stdout.contains("Total"));

    let result = run(&["stats", "--input", input.to_str().unwrap(), "--report-format", "yaml"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn assemble_sft_ratio_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sft.jsonl");
    let mut lines = Vec::new();
    for i in 0..200 {
        lines.push(format!(
            "{{\"id\":\"f{i}\",\"source\":\"synthetic\",\"favored\":true,\"turns\":[{{\"role\":\"user\",\"content\":\"Прашање {i}?\"}},{{\"role\":\"assistant\",\"content\":\"Одговор {i}.\"}}]}}"
        ));
        lines.push(format!(
            "{{\"id\":\"t{i}\",\"source\":\"translated\",\"favored\":false,\"turns\":[{{\"role\":\"user\",\"content\":\"Question {i}?\"}},{{\"role\":\"assistant\",\"content\":\"Answer {i}.\"}}]}}"
        ));
    }
    std::fs::write(&input, lines.join("\n") + "\n").unwrap();

    let mut outputs = Vec::new();
    for name in ["m1", "m2"] {
        let out = dir.path().join(format!("{name}.jsonl"));
        let result = run(&[
            "assemble-sft",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--ratio",
            "2:1",
            "--max-tokens",
            "4096",
            "--seed",
            "17",
            "--target",
            "600",
            "--chat-output",
            dir.path().join(format!("{name}-chat.jsonl")).to_str().unwrap(),
        ]);
        assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "same seed must reproduce the same mix");

    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let favored = text.lines().filter(|l| l.contains("\"favored\":true")).count();
    let total = text.lines().count();
    assert_eq!(total, 600);
    assert!((0.60..0.73).contains(&(favored as f64 / total as f64)));

    let chat = std::fs::read_to_string(dir.path().join("m1-chat.jsonl")).unwrap();
    assert!(chat.contains("im_start"));
    assert!(chat.contains("Ти си виртуелен асистент"));
}

#[test]
fn template_mcq_identity_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("items.jsonl");
    let items: Vec<String> = (0..20)
        .map(|i| {
            format!(
                "{{\"id\":\"q{i}\",\"stem\":\"Прашањето {i} секогаш е\",\"choices\":[\"а\",\"б\",\"в\"],\"answer_index\":{}}}",
                i % 3
            )
        })
        .collect();
    std::fs::write(&input, items.join("\n") + "\n").unwrap();
    let output = dir.path().join("out.jsonl");
    let review = dir.path().join("review.jsonl");

    let result = run(&[
        "template-mcq",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--translator",
        "identity",
        "--review",
        review.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    assert_eq!(
        std::fs::read_to_string(&input).unwrap(),
        std::fs::read_to_string(&output).unwrap(),
        "identity translation must reproduce the input items"
    );
    assert_eq!(std::fs::read_to_string(&review).unwrap(), "");
}

#[test]
fn template_mcq_external_command_translator() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("items.jsonl");
    std::fs::write(
        &input,
        "{\"id\":\"q0\",\"stem\":\"Надворешниот преведувач го гледа ова\",\"choices\":[\"а\",\"б\"],\"answer_index\":0}\n",
    )
    .unwrap();
    let output = dir.path().join("out.jsonl");

    // `cat` is the identity as an external process.
    let result = run(&[
        "template-mcq",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--translator",
        "command",
        "--translator-cmd",
        "cat",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert_eq!(
        std::fs::read_to_string(&input).unwrap(),
        std::fs::read_to_string(&output).unwrap()
    );
}

#[test]
fn train_langid_then_filter_with_model() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.jsonl");
    let mk = include_str!("../assets/langid/mk.txt").replace('\n', " ");
    let en = include_str!("../assets/langid/en.txt").replace('\n', " ");
    std::fs::write(
        &train,
        format!(
            "{}\n{}\n",
            serde_json::json!({"text": mk, "lang": "mk"}),
            serde_json::json!({"text": en, "lang": "en"}),
        ),
    )
    .unwrap();
    let model = dir.path().join("model.cflm");
    let result = run(&[
        "train-langid",
        "--input",
        train.to_str().unwrap(),
        "--output",
        model.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert!(model.exists());

    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let output = dir.path().join("out.jsonl");
    let result = run(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--langid-model",
        model.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let kept = std::fs::read_to_string(&output).unwrap();
    assert!(kept.contains("\"id\":\"a\""));
    assert!(!kept.contains("\"id\":\"b\""));
}

#[test]
fn workers_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_small_corpus(&input);
    let output = dir.path().join("out.jsonl");
    let result = Command::new(BIN)
        .env("CORPUS_FORGE_WORKERS", "3")
        .args([
            "filter",
            "--input",
            input.to_str().unwrap(),
            "--output",
            output.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("\"workers\":3"), "stderr: {stderr}");

    // Garbage in the env var is a runtime error, not silently ignored.
    let result = Command::new(BIN)
        .env("CORPUS_FORGE_WORKERS", "many")
        .args([
            "filter",
            "--input",
            input.to_str().unwrap(),
            "--output",
            output.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}
