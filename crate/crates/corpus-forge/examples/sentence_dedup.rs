//! Corpus-wide exact sentence deduplication: boilerplate that repeats across
//! documents survives only in the first document by id.
//!
//! ```bash
//! cargo run --example sentence_dedup
//! ```

use corpus_forge::dedup::{sentence_dedup, split_sentences};
use corpus_forge::model::{Document, PipelineConfig, SourceKind};

fn main() {
    let boiler = "Сите права се задржани и содржината не смее да се копира.";
    let docs = vec![
        Document::new(
            "news-002",
            "web",
            SourceKind::Web,
            &format!("Втора вест за настаните во градот. {boiler}"),
        ),
        Document::new(
            "news-001",
            "web",
            SourceKind::Web,
            &format!("Прва вест со своја содржина. {boiler} Уште една реченица."),
        ),
        Document::new("news-003", "web", SourceKind::Web, boiler),
    ];

    println!("sentences before:");
    for doc in &docs {
        println!("  {}: {:?}", doc.id, split_sentences(&doc.text));
    }

    let (kept, outcomes) = sentence_dedup(docs, &PipelineConfig::default());

    println!("\nsentences after (keep-first by ascending id):");
    for doc in &kept {
        println!("  {}: {:?}", doc.id, split_sentences(&doc.text));
    }
    println!("\noutcomes:");
    for (id, outcome) in &outcomes {
        println!("  {id}: {outcome:?}");
    }
}
