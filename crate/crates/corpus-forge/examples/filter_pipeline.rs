//! End-to-end funnel over a small generated corpus, file to file, with the
//! funnel report, dedup report, and error sidecar.
//!
//! ```bash
//! cargo run --example filter_pipeline
//! ```

use corpus_forge::langid::default_classifier;
use corpus_forge::model::{Document, PipelineConfig, SourceKind};
use corpus_forge::pii::PiiRuleSet;
use corpus_forge::pipeline::{Pipeline, RunOptions, RunPaths, StagePlan};
use corpus_forge::report::{render_table, TableFormat};

fn main() {
    let dir = std::env::temp_dir().join("corpus-forge-example");
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("in.jsonl");

    let good = "Ова е добра реченица напишана на македонски јазик.\nВтората реченица исто така завршува со точка и е доволно долга.";
    let mut lines = vec![
        serde_json::to_string(&Document::new("w1", "hplt2", SourceKind::Web, good)).unwrap(),
        serde_json::to_string(&Document::new(
            "w2",
            "hplt2",
            SourceKind::Web,
            "Контакт: ana@example.mk, тел. +389 70 123 456. Останатиот текст од документот е сосема во ред.",
        ))
        .unwrap(),
        serde_json::to_string(&Document::new(
            "w3",
            "fineweb2",
            SourceKind::Web,
            "This page is written in English and the gate must drop it entirely.",
        ))
        .unwrap(),
        // Near duplicate of w1 under a later id.
        serde_json::to_string(&Document::new("w9", "fineweb2", SourceKind::Web, good)).unwrap(),
        "this line is not json".to_string(),
    ];
    // A long document-kind record that the chunker will split.
    let long: String = (0..1500)
        .map(|i| format!("Документна реченица {i} со неколку збора."))
        .collect::<Vec<_>>()
        .join(" ");
    lines.push(
        serde_json::to_string(&Document::new("doc1", "documents", SourceKind::Document, &long))
            .unwrap(),
    );
    std::fs::write(&input, lines.join("\n") + "\n").unwrap();

    let config = PipelineConfig { chunk_max_words: 2000, seed: 7, ..PipelineConfig::default() };
    let plan = StagePlan::default();
    let pii_rules = PiiRuleSet::default();
    let pipeline = Pipeline {
        plan: &plan,
        config: &config,
        pii_rules: &pii_rules,
        classifier: default_classifier(),
    };
    let paths = RunPaths {
        inputs: vec![input],
        output: dir.join("out.jsonl"),
        dedup_report: Some(dir.join("dedup.jsonl")),
        report_json: Some(dir.join("report.json")),
        sidecar: Some(dir.join("errors.jsonl")),
        ..RunPaths::default()
    };

    let report = pipeline.run(&paths, &RunOptions { strict: false, quiet: true }).unwrap();
    println!("{}", render_table(&report, TableFormat::Markdown));
    println!("outputs under {}", dir.display());
    for name in ["out.jsonl", "dedup.jsonl", "report.json", "errors.jsonl"] {
        let len = std::fs::metadata(dir.join(name)).map(|m| m.len()).unwrap_or(0);
        println!("  {name}: {len} bytes");
    }
}
