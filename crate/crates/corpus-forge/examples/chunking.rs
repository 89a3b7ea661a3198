//! Sentence-aligned chunking of long document-kind texts under a word
//! budget, with byte-exact reconstruction.
//!
//! ```bash
//! cargo run --example chunking
//! ```

use corpus_forge::chunk::{chunk_document, chunk_to_document};
use corpus_forge::model::{Document, PipelineConfig, SourceKind};

fn main() {
    // A 10,000-word scanned-document text made of 5-word sentences.
    let text: String = (0..2000)
        .map(|i| format!("Реченица{i} со уште три збора."))
        .collect::<Vec<_>>()
        .join(" ");
    let parent = Document::new("book-01", "documents", SourceKind::Document, &text);
    println!("parent words: {}", parent.word_count());

    let config = PipelineConfig::default(); // 4000-word budget
    let chunks = chunk_document(&parent, &config);
    for chunk in &chunks {
        println!(
            "chunk {} words={} oversized={}",
            chunk.index, chunk.word_count, chunk.oversized
        );
    }

    let rebuilt: String = chunks.iter().map(|c| c.text.as_str()).collect();
    println!("reconstruction exact: {}", rebuilt == parent.text);

    let child = chunk_to_document(&chunks[1], &parent);
    println!("child id: {}", child.id);
    println!("child meta: {}", serde_json::to_string(&child.meta).unwrap());
}
