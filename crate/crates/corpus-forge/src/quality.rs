//! Line-level and document-level quality heuristics.
//!
//! The line filter keeps only lines with enough words and terminal
//! punctuation. The document filter rejects documents whose bullet-line or
//! ellipsis-line ratios strictly exceed their thresholds; two further
//! repetition rules (duplicate-line fraction, top 2-gram character fraction)
//! exist but ship disabled until configured.

use std::collections::HashMap;

use crate::model::{word_count, Document, FilterOutcome, PipelineConfig, ReasonCode};

/// Characters that close a sentence for the line filter. A terminal quote,
/// guillemet, or paren is accepted on its own since it normally follows a
/// terminal mark.
pub const TERMINAL_PUNCTUATION: [char; 7] = ['.', '!', '?', '…', '"', '»', ')'];

/// Characters that open a bulleted line (after leading whitespace).
pub const BULLET_CHARS: [char; 6] = ['•', '‣', '▪', '-', '–', '*'];

/// Per-line quantities the filters decide on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineStats<'a> {
    pub line: &'a str,
    pub word_count: usize,
    pub ends_terminal: bool,
    pub starts_bullet: bool,
    pub ends_ellipsis: bool,
}

pub fn line_stats(line: &str) -> LineStats<'_> {
    let trimmed_end = line.trim_end();
    let ends_terminal = trimmed_end
        .chars()
        .next_back()
        .map(|c| TERMINAL_PUNCTUATION.contains(&c))
        .unwrap_or(false);
    let starts_bullet = line
        .trim_start()
        .chars()
        .next()
        .map(|c| BULLET_CHARS.contains(&c))
        .unwrap_or(false);
    let ends_ellipsis = trimmed_end.ends_with('…') || trimmed_end.ends_with("...");
    LineStats {
        line,
        word_count: word_count(line),
        ends_terminal,
        starts_bullet,
        ends_ellipsis,
    }
}

/// Document-level line ratios; 0 for an empty document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRatios {
    pub bullet_line_ratio: f64,
    pub ellipsis_line_ratio: f64,
    pub line_count: usize,
}

pub fn doc_ratios(text: &str) -> DocRatios {
    let mut line_count = 0usize;
    let mut bullets = 0usize;
    let mut ellipses = 0usize;
    for line in text.split('\n') {
        line_count += 1;
        let stats = line_stats(line);
        if stats.starts_bullet {
            bullets += 1;
        }
        if stats.ends_ellipsis {
            ellipses += 1;
        }
    }
    if line_count == 0 {
        return DocRatios { bullet_line_ratio: 0.0, ellipsis_line_ratio: 0.0, line_count: 0 };
    }
    DocRatios {
        bullet_line_ratio: bullets as f64 / line_count as f64,
        ellipsis_line_ratio: ellipses as f64 / line_count as f64,
        line_count,
    }
}

/// Keeps only lines with at least `min_line_words` words *and* terminal
/// punctuation. `Transformed` when lines were removed, `Drop(EmptyAfterC4)`
/// when nothing survives; the returned document text is empty in that case.
pub fn c4_line_filter(doc: Document, config: &PipelineConfig) -> (Document, FilterOutcome) {
    let mut kept: Vec<&str> = Vec::new();
    let mut removed = 0usize;
    let mut total = 0usize;
    let mut first_reason: Option<ReasonCode> = None;

    for line in doc.text.split('\n') {
        total += 1;
        let stats = line_stats(line);
        if stats.word_count < config.min_line_words {
            removed += 1;
            first_reason.get_or_insert(ReasonCode::TooFewWordsLine);
        } else if !stats.ends_terminal {
            removed += 1;
            first_reason.get_or_insert(ReasonCode::NoTerminalPunct);
        } else {
            kept.push(line);
        }
    }

    if removed == 0 {
        return (doc, FilterOutcome::keep());
    }
    if kept.is_empty() {
        let doc = Document { text: String::new(), ..doc };
        return (doc, FilterOutcome::drop(ReasonCode::EmptyAfterC4));
    }
    let text = kept.join("\n");
    let outcome = FilterOutcome::transformed_with(
        first_reason.expect("removed > 0 implies a reason"),
        format!("lines_removed={removed} of {total}"),
    );
    (Document { text, ..doc }, outcome)
}

/// Rejects documents on line-shape ratios. Strict inequalities throughout:
/// exactly-at-threshold documents are kept. Reason precedence is fixed:
/// bullets, then ellipses, then the optional repetition rules.
pub fn gopher_doc_filter(doc: &Document, config: &PipelineConfig) -> FilterOutcome {
    let ratios = doc_ratios(&doc.text);
    if ratios.bullet_line_ratio > config.bullet_ratio_max {
        return FilterOutcome::drop_with(
            ReasonCode::BulletRatio,
            format!("ratio={:.4}", ratios.bullet_line_ratio),
        );
    }
    if ratios.ellipsis_line_ratio > config.ellipsis_ratio_max {
        return FilterOutcome::drop_with(
            ReasonCode::EllipsisRatio,
            format!("ratio={:.4}", ratios.ellipsis_line_ratio),
        );
    }
    if let Some(max) = config.duplicate_line_fraction_max {
        let fraction = duplicate_line_fraction(&doc.text);
        if fraction > max {
            return FilterOutcome::drop_with(
                ReasonCode::DuplicateLineFraction,
                format!("fraction={fraction:.4}"),
            );
        }
    }
    if let Some(max) = config.top_two_gram_fraction_max {
        let fraction = top_two_gram_fraction(&doc.text);
        if fraction > max {
            return FilterOutcome::drop_with(
                ReasonCode::TopTwoGramFraction,
                format!("fraction={fraction:.4}"),
            );
        }
    }
    FilterOutcome::keep()
}

/// Fraction of lines that exactly repeat an earlier line.
pub fn duplicate_line_fraction(text: &str) -> f64 {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut total = 0usize;
    let mut dupes = 0usize;
    for line in text.split('\n') {
        total += 1;
        if seen.insert(line, ()).is_some() {
            dupes += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        dupes as f64 / total as f64
    }
}

/// Character fraction covered by the most frequent word 2-gram: occurrences
/// times gram character length, over the total characters in words.
pub fn top_two_gram_fraction(text: &str) -> f64 {
    let words: Vec<&str> = text.split_whitespace().collect();
    let total_chars: usize = words.iter().map(|w| w.chars().count()).sum();
    if words.len() < 2 || total_chars == 0 {
        return 0.0;
    }
    let mut counts: HashMap<(&str, &str), usize> = HashMap::new();
    for pair in words.windows(2) {
        *counts.entry((pair[0], pair[1])).or_insert(0) += 1;
    }
    let top = counts
        .iter()
        .map(|((a, b), n)| n * (a.chars().count() + b.chars().count()))
        .max()
        .unwrap_or(0);
    (top as f64 / total_chars as f64).min(1.0)
}
