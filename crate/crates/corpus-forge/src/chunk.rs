//! Splits long document-kind texts into sentence-aligned chunks under a
//! word budget. Chunks tile the original text exactly, so concatenating
//! them in index order reconstructs the parent byte for byte.

use serde_json::json;

use crate::model::{word_count, Document, PipelineConfig, SourceKind};
use crate::sentence::segment_sentences;

#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub parent_id: String,
    pub index: usize,
    pub text: String,
    pub word_count: usize,
    /// Set when the chunk is a single sentence longer than the budget;
    /// sentences are never split mid-way.
    pub oversized: bool,
}

/// Greedy sentence packing: a new chunk starts when adding the next sentence
/// would exceed `chunk_max_words`. Intended for `source_kind = document`
/// inputs; the pipeline skips every other kind.
pub fn chunk_document(doc: &Document, config: &PipelineConfig) -> Vec<Chunk> {
    let budget = config.chunk_max_words;
    let text = &doc.text;
    let spans = segment_sentences(text);

    if spans.is_empty() {
        return vec![Chunk {
            parent_id: doc.id.clone(),
            index: 0,
            text: text.clone(),
            word_count: word_count(text),
            oversized: false,
        }];
    }

    struct Pending {
        start: usize,
        end: usize,
        words: usize,
    }

    let mut chunks: Vec<Chunk> = Vec::new();
    let mut pending: Option<Pending> = None;

    let flush = |chunks: &mut Vec<Chunk>, pending: &mut Option<Pending>, oversized: bool| {
        if let Some(p) = pending.take() {
            chunks.push(Chunk {
                parent_id: doc.id.clone(),
                index: chunks.len(),
                text: text[p.start..p.end].to_string(),
                word_count: p.words,
                oversized,
            });
        }
    };

    for span in &spans {
        let words = word_count(span.sentence(text));
        if words > budget {
            // Oversized sentence: close the open chunk, then emit the
            // sentence alone, flagged.
            flush(&mut chunks, &mut pending, false);
            pending = Some(Pending { start: span.region_start, end: span.region_end, words });
            flush(&mut chunks, &mut pending, true);
            continue;
        }
        match pending.as_mut() {
            Some(p) if p.words + words > budget => {
                flush(&mut chunks, &mut pending, false);
                pending = Some(Pending { start: span.region_start, end: span.region_end, words });
            }
            Some(p) => {
                p.end = span.region_end;
                p.words += words;
            }
            None => {
                pending = Some(Pending { start: span.region_start, end: span.region_end, words });
            }
        }
    }
    flush(&mut chunks, &mut pending, false);

    chunks
}

/// Materializes a chunk as a corpus document: id `"<parent_id>#<index>"`,
/// parent lineage in `meta`.
pub fn chunk_to_document(chunk: &Chunk, parent: &Document) -> Document {
    let mut meta = parent.meta.clone();
    meta.insert("parent_id".to_string(), json!(chunk.parent_id));
    meta.insert("chunk_index".to_string(), json!(chunk.index));
    if chunk.oversized {
        meta.insert("oversized_sentence".to_string(), json!(true));
    }
    Document {
        id: format!("{}#{}", chunk.parent_id, chunk.index),
        source: parent.source.clone(),
        source_kind: parent.source_kind,
        text: chunk.text.clone(),
        lang_confidence: parent.lang_confidence,
        meta,
    }
}

/// Convenience used by the pipeline: chunk a document-kind record into child
/// documents; any other kind passes through untouched.
pub fn chunk_stage(doc: Document, config: &PipelineConfig) -> Vec<Document> {
    if doc.source_kind != SourceKind::Document {
        return vec![doc];
    }
    let chunks = chunk_document(&doc, config);
    if chunks.len() == 1 && !chunks[0].oversized {
        // Under budget: keep the original record, no lineage noise.
        return vec![doc];
    }
    chunks.iter().map(|c| chunk_to_document(c, &doc)).collect()
}
