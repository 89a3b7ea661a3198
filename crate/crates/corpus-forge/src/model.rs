//! Shared data model: documents, filter outcomes, and the pipeline configuration.
//!
//! Every stage consumes and produces [`Document`] values and reports a
//! [`FilterOutcome`]. Documents are immutable values that are safe to send
//! between workers; stages never mutate shared state.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

/// Canonical Unicode normalization (NFC), applied once on ingest.
///
/// All downstream hashing (sentence keys, shingles) assumes text is already
/// in this form, so dedup correctness depends on it being byte-stable.
pub fn normalize_text(text: &str) -> String {
    match is_nfc_quick(text.chars()) {
        IsNormalized::Yes => text.to_string(),
        _ => text.nfc().collect(),
    }
}

/// Number of maximal whitespace-delimited tokens in `text`.
///
/// This is the single word-counting rule used everywhere: line filters,
/// chunk budgets, and funnel statistics.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Broad origin category of a document; gates kind-specific stages
/// (chunking applies only to `Document` kind sources).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    Web,
    Document,
    Wiki,
    Transcript,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SourceKind::Web => "web",
            SourceKind::Document => "document",
            SourceKind::Wiki => "wiki",
            SourceKind::Transcript => "transcript",
        };
        f.write_str(s)
    }
}

/// One corpus record.
///
/// Field order here fixes the on-disk JSONL column order, so reordering
/// fields is a format change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub source: String,
    #[serde(default)]
    pub source_kind: SourceKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang_confidence: Option<f64>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl Document {
    /// Builds a document with canonically normalized text.
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        source_kind: SourceKind,
        text: &str,
    ) -> Self {
        Document {
            id: id.into(),
            source: source.into(),
            source_kind,
            text: normalize_text(text),
            lang_confidence: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn word_count(&self) -> usize {
        word_count(&self.text)
    }
}

/// Machine-readable cause attached to every drop or transform.
///
/// This is a closed enum: one code per rule, and every dropped document in a
/// run maps to exactly one of them.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum ReasonCode {
    PiiScrubbed,
    TooFewWordsLine,
    NoTerminalPunct,
    EmptyAfterC4,
    BulletRatio,
    EllipsisRatio,
    DuplicateLineFraction,
    TopTwoGramFraction,
    LangIdBelowThreshold,
    DuplicateSentence,
    NearDuplicateDoc,
    ExchangeTruncated,
    OversizedExchange,
    PlaceholderLost,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Keep/drop/transform decision for one document at one stage.
///
/// The shape makes the invariant structural: a `Drop` always carries a
/// reason, a `Keep` never does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterOutcome {
    Keep,
    Drop {
        reason: ReasonCode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
    },
    Transformed {
        reason: ReasonCode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
    },
}

/// Decision kind without the reason payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Keep,
    Drop,
    Transformed,
}

impl FilterOutcome {
    pub fn keep() -> Self {
        FilterOutcome::Keep
    }

    pub fn drop(reason: ReasonCode) -> Self {
        FilterOutcome::Drop { reason, detail: None }
    }

    pub fn drop_with(reason: ReasonCode, detail: impl Into<String>) -> Self {
        FilterOutcome::Drop { reason, detail: Some(detail.into()) }
    }

    pub fn transformed(reason: ReasonCode) -> Self {
        FilterOutcome::Transformed { reason, detail: None }
    }

    pub fn transformed_with(reason: ReasonCode, detail: impl Into<String>) -> Self {
        FilterOutcome::Transformed { reason, detail: Some(detail.into()) }
    }

    pub fn decision(&self) -> Decision {
        match self {
            FilterOutcome::Keep => Decision::Keep,
            FilterOutcome::Drop { .. } => Decision::Drop,
            FilterOutcome::Transformed { .. } => Decision::Transformed,
        }
    }

    pub fn reason(&self) -> Option<ReasonCode> {
        match self {
            FilterOutcome::Keep => None,
            FilterOutcome::Drop { reason, .. } | FilterOutcome::Transformed { reason, .. } => {
                Some(*reason)
            }
        }
    }

    pub fn is_keep(&self) -> bool {
        matches!(self, FilterOutcome::Keep)
    }

    pub fn is_drop(&self) -> bool {
        matches!(self, FilterOutcome::Drop { .. })
    }

    pub fn is_transformed(&self) -> bool {
        matches!(self, FilterOutcome::Transformed { .. })
    }
}

/// All tunables for the filtering funnel. See [`validate_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Language-gate confidence threshold; documents at or below it are dropped.
    pub langid_threshold: f64,
    /// ISO-style code the language gate keeps.
    pub target_language: String,
    /// Minimum words per line for the line-level filter.
    pub min_line_words: usize,
    /// Drop a document when its bullet-line ratio strictly exceeds this.
    pub bullet_ratio_max: f64,
    /// Drop a document when its ellipsis-line ratio strictly exceeds this.
    pub ellipsis_ratio_max: f64,
    /// Optional extra repetition rule: maximal fraction of duplicated lines.
    /// Disabled (`None`) by default.
    pub duplicate_line_fraction_max: Option<f64>,
    /// Optional extra repetition rule: maximal character fraction covered by
    /// the most frequent word 2-gram. Disabled (`None`) by default.
    pub top_two_gram_fraction_max: Option<f64>,
    /// Word budget per chunk for document-kind sources.
    pub chunk_max_words: usize,
    pub minhash_permutations: usize,
    pub lsh_bands: usize,
    pub lsh_rows: usize,
    /// Words per shingle for MinHash signatures.
    pub shingle_size: usize,
    /// Sentences shorter than this (in chars) are too generic to deduplicate.
    pub min_sentence_chars: usize,
    pub seed: u64,
    pub worker_count: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            langid_threshold: 0.65,
            target_language: "mk".to_string(),
            min_line_words: 3,
            bullet_ratio_max: 0.90,
            ellipsis_ratio_max: 0.30,
            duplicate_line_fraction_max: None,
            top_two_gram_fraction_max: None,
            chunk_max_words: 4000,
            minhash_permutations: 128,
            lsh_bands: 16,
            lsh_rows: 8,
            shingle_size: 5,
            min_sentence_chars: 15,
            seed: 42,
            worker_count: default_worker_count(),
        }
    }
}

pub fn default_worker_count() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("lsh_bands ({bands}) x lsh_rows ({rows}) = {product}, must equal minhash_permutations ({permutations})")]
    BandRowMismatch { bands: usize, rows: usize, product: usize, permutations: usize },
    #[error("{field} must lie in [0,1], got {value}")]
    RatioOutOfRange { field: &'static str, value: f64 },
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("target_language must be non-empty")]
    EmptyTargetLanguage,
}

/// Checks every config invariant and returns the config unchanged iff all hold.
pub fn validate_config(config: PipelineConfig) -> Result<PipelineConfig, ConfigError> {
    let ratios: [(&'static str, f64); 3] = [
        ("langid_threshold", config.langid_threshold),
        ("bullet_ratio_max", config.bullet_ratio_max),
        ("ellipsis_ratio_max", config.ellipsis_ratio_max),
    ];
    for (field, value) in ratios {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(ConfigError::RatioOutOfRange { field, value });
        }
    }
    let optional_ratios: [(&'static str, Option<f64>); 2] = [
        ("duplicate_line_fraction_max", config.duplicate_line_fraction_max),
        ("top_two_gram_fraction_max", config.top_two_gram_fraction_max),
    ];
    for (field, value) in optional_ratios {
        if let Some(value) = value {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(ConfigError::RatioOutOfRange { field, value });
            }
        }
    }

    let counts: [(&'static str, usize); 8] = [
        ("min_line_words", config.min_line_words),
        ("chunk_max_words", config.chunk_max_words),
        ("minhash_permutations", config.minhash_permutations),
        ("lsh_bands", config.lsh_bands),
        ("lsh_rows", config.lsh_rows),
        ("shingle_size", config.shingle_size),
        ("min_sentence_chars", config.min_sentence_chars),
        ("worker_count", config.worker_count),
    ];
    for (field, value) in counts {
        if value < 1 {
            return Err(ConfigError::ZeroCount { field });
        }
    }

    if config.lsh_bands * config.lsh_rows != config.minhash_permutations {
        return Err(ConfigError::BandRowMismatch {
            bands: config.lsh_bands,
            rows: config.lsh_rows,
            product: config.lsh_bands * config.lsh_rows,
            permutations: config.minhash_permutations,
        });
    }

    if config.target_language.is_empty() {
        return Err(ConfigError::EmptyTargetLanguage);
    }

    Ok(config)
}
