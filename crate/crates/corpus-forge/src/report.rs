//! Funnel statistics and source-distribution tables.
//!
//! Documents in chunk-expanding stages are counted in parent units so
//! `docs_out <= docs_in` holds at every stage; the physical record count
//! after expansion is reported separately as `records_out`. Because the
//! paper-style source table can be read against either the raw or the
//! filtered corpus, the report carries both views.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{word_count, Document, ReasonCode};

/// Per-stage accounting. `docs_*` count logical documents; `records_out`
/// counts physical records and differs from `docs_out` only when a stage
/// expands documents (chunking).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub docs_in: u64,
    pub docs_out: u64,
    pub records_out: u64,
    pub words_in: u64,
    pub words_out: u64,
    pub drop_reasons: BTreeMap<ReasonCode, u64>,
}

impl StageRecord {
    pub fn dropped(&self) -> u64 {
        self.docs_in - self.docs_out
    }
}

/// One row of the source-distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub source: String,
    pub words: u64,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FunnelReport {
    pub stages: Vec<StageRecord>,
    /// Source distribution of the corpus entering the funnel.
    pub sources_in: Vec<SourceRecord>,
    /// Source distribution of the corpus leaving the funnel.
    pub sources_out: Vec<SourceRecord>,
}

impl FunnelReport {
    pub fn total_dropped(&self) -> u64 {
        self.stages.iter().map(|s| s.dropped()).sum()
    }
}

pub fn total_words(docs: &[Document]) -> u64 {
    docs.iter().map(|d| word_count(&d.text) as u64).sum()
}

/// Counts one stage's transition. Word and document counts are exact;
/// drop histogram comes from the stage's recorded reasons.
pub fn tally(
    stage: &str,
    before: &[Document],
    after: &[Document],
    drops: &[ReasonCode],
) -> StageRecord {
    let mut drop_reasons: BTreeMap<ReasonCode, u64> = BTreeMap::new();
    for reason in drops {
        *drop_reasons.entry(*reason).or_insert(0) += 1;
    }
    StageRecord {
        stage: stage.to_string(),
        docs_in: before.len() as u64,
        docs_out: before.len() as u64 - drops.len() as u64,
        records_out: after.len() as u64,
        words_in: total_words(before),
        words_out: total_words(after),
        drop_reasons,
    }
}

/// Word totals per source, descending by words (ties on source name), with
/// percentages of the grand total.
pub fn source_distribution(docs: &[Document]) -> Vec<SourceRecord> {
    let mut by_source: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        *by_source.entry(doc.source.as_str()).or_insert(0) += word_count(&doc.text) as u64;
    }
    let total: u64 = by_source.values().sum();
    let mut records: Vec<SourceRecord> = by_source
        .into_iter()
        .map(|(source, words)| SourceRecord {
            source: source.to_string(),
            words,
            percentage: if total == 0 { 0.0 } else { words as f64 * 100.0 / total as f64 },
        })
        .collect();
    records.sort_by(|a, b| b.words.cmp(&a.words).then_with(|| a.source.cmp(&b.source)));
    records
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Json,
    Csv,
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown report format {0:?}; expected markdown, json, or csv")]
pub struct UnknownFormat(pub String);

impl FromStr for TableFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "json" => Ok(TableFormat::Json),
            "csv" => Ok(TableFormat::Csv),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

fn source_table_markdown(title: &str, records: &[SourceRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(out, "| Source | Words | Percentage |");
    let _ = writeln!(out, "|---|---:|---:|");
    let mut total = 0u64;
    for r in records {
        let _ = writeln!(out, "| {} | {} | {:.2}% |", r.source, r.words, r.percentage);
        total += r.words;
    }
    let total_pct = if records.is_empty() { 0.0 } else { 100.0 };
    let _ = writeln!(out, "| **Total** | **{total}** | **{total_pct:.2}%** |");
    out
}

fn source_table_csv(records: &[SourceRecord]) -> String {
    let mut out = String::from("Source,Words,Percentage\n");
    let mut total = 0u64;
    for r in records {
        let _ = writeln!(out, "{},{},{:.2}%", r.source, r.words, r.percentage);
        total += r.words;
    }
    let total_pct = if records.is_empty() { 0.0 } else { 100.0 };
    let _ = writeln!(out, "Total,{total},{total_pct:.2}%");
    out
}

/// Renders the report. JSON carries the whole report and parses back to an
/// identical value; markdown adds the per-stage funnel next to both source
/// tables; csv is the filtered-corpus source table alone.
pub fn render_table(report: &FunnelReport, format: TableFormat) -> String {
    match format {
        TableFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes")
        }
        TableFormat::Csv => source_table_csv(&report.sources_out),
        TableFormat::Markdown => {
            let mut out = String::new();
            if !report.stages.is_empty() {
                let _ = writeln!(out, "### Funnel\n");
                let _ = writeln!(
                    out,
                    "| Stage | Docs in | Docs out | Records out | Words in | Words out | Drops |"
                );
                let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|---|");
                for s in &report.stages {
                    let drops = if s.drop_reasons.is_empty() {
                        "-".to_string()
                    } else {
                        s.drop_reasons
                            .iter()
                            .map(|(r, n)| format!("{r}:{n}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} | {} |",
                        s.stage, s.docs_in, s.docs_out, s.records_out, s.words_in, s.words_out,
                        drops
                    );
                }
                out.push('\n');
            }
            out.push_str(&source_table_markdown("Sources (input corpus)", &report.sources_in));
            out.push('\n');
            out.push_str(&source_table_markdown(
                "Sources (filtered corpus)",
                &report.sources_out,
            ));
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceKind;

    fn doc(id: &str, source: &str, words: usize) -> Document {
        let text: Vec<String> = (0..words).map(|i| format!("w{i}")).collect();
        Document::new(id, source, SourceKind::Web, &text.join(" "))
    }

    #[test]
    fn tally_counts_docs_and_words() {
        let before: Vec<Document> = (0..10).map(|i| doc(&format!("d{i}"), "s", 5)).collect();
        let after: Vec<Document> = before[..7].to_vec();
        let drops = vec![
            ReasonCode::BulletRatio,
            ReasonCode::BulletRatio,
            ReasonCode::LangIdBelowThreshold,
        ];
        let record = tally("gopher", &before, &after, &drops);
        assert_eq!(record.docs_in, 10);
        assert_eq!(record.docs_out, 7);
        assert_eq!(record.records_out, 7);
        assert_eq!(record.words_in, 50);
        assert_eq!(record.words_out, 35);
        assert_eq!(record.drop_reasons[&ReasonCode::BulletRatio], 2);
        assert_eq!(record.drop_reasons[&ReasonCode::LangIdBelowThreshold], 1);
        assert_eq!(record.drop_reasons.values().sum::<u64>(), record.dropped());
    }

    #[test]
    fn word_totals_match_independent_recount() {
        let docs = vec![
            doc("a", "x", 13),
            doc("b", "x", 7),
            Document::new("c", "y", SourceKind::Web, "  еден   два\nтри  "),
        ];
        // Oracle: count tokens by scanning char runs, no split_whitespace.
        let mut expected = 0u64;
        for d in &docs {
            let mut in_word = false;
            for c in d.text.chars() {
                if c.is_whitespace() {
                    in_word = false;
                } else if !in_word {
                    expected += 1;
                    in_word = true;
                }
            }
        }
        assert_eq!(total_words(&docs), expected);
        assert_eq!(total_words(&docs), 23);
    }

    #[test]
    fn source_split_percentages_format_to_two_decimals() {
        let docs = vec![doc("a", "alpha", 75), doc("b", "beta", 25)];
        let records = source_distribution(&docs);
        assert_eq!(records[0].source, "alpha");
        let report = FunnelReport {
            stages: vec![],
            sources_in: records.clone(),
            sources_out: records,
        };
        let md = render_table(&report, TableFormat::Markdown);
        assert!(md.contains("75.00%"));
        assert!(md.contains("25.00%"));
        let csv = render_table(&report, TableFormat::Csv);
        assert!(csv.contains("alpha,75,75.00%"));
        assert!(csv.contains("Total,100,100.00%"));
    }

    #[test]
    fn single_source_is_hundred_percent() {
        let docs = vec![doc("a", "only", 40)];
        let records = source_distribution(&docs);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].percentage, 100.0);
        let report =
            FunnelReport { stages: vec![], sources_in: vec![], sources_out: records };
        assert!(render_table(&report, TableFormat::Csv).contains("only,40,100.00%"));
    }

    #[test]
    fn percentages_sum_to_hundred() {
        let docs = vec![
            doc("a", "s1", 17),
            doc("b", "s2", 23),
            doc("c", "s3", 41),
            doc("d", "s1", 9),
        ];
        let sum: f64 = source_distribution(&docs).iter().map(|r| r.percentage).sum();
        assert!((sum - 100.0).abs() <= 0.01);
    }

    #[test]
    fn json_render_roundtrips() {
        let docs = vec![doc("a", "s1", 10), doc("b", "s2", 20)];
        let report = FunnelReport {
            stages: vec![tally("pii", &docs, &docs, &[])],
            sources_in: source_distribution(&docs),
            sources_out: source_distribution(&docs),
        };
        let rendered = render_table(&report, TableFormat::Json);
        let parsed: FunnelReport = serde_json::from_str(&rendered).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn unknown_format_is_an_error() {
        assert!("markdown".parse::<TableFormat>().is_ok());
        assert!("MD".parse::<TableFormat>().is_ok());
        let err = "yaml".parse::<TableFormat>().unwrap_err();
        assert_eq!(err, UnknownFormat("yaml".into()));
    }

    #[test]
    fn descending_order_by_words() {
        let docs = vec![doc("a", "small", 5), doc("b", "big", 50), doc("c", "mid", 20)];
        let records = source_distribution(&docs);
        let names: Vec<&str> = records.iter().map(|r| r.source.as_str()).collect();
        assert_eq!(names, vec!["big", "mid", "small"]);
    }
}
