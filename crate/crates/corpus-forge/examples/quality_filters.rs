//! Line-level and document-level quality rules, including the exact
//! threshold boundaries.
//!
//! ```bash
//! cargo run --example quality_filters
//! ```

use corpus_forge::model::{Document, PipelineConfig, SourceKind};
use corpus_forge::quality::{c4_line_filter, doc_ratios, gopher_doc_filter};

fn main() {
    let config = PipelineConfig::default();

    let doc = Document::new(
        "mixed",
        "demo",
        SourceKind::Web,
        "Добро утро.\nОва е целосна реченица со доволно зборови.\nлинија без крај\nИ уште една добра реченица на крајот.",
    );
    println!("line filter input ({} lines):", doc.text.lines().count());
    let (filtered, outcome) = c4_line_filter(doc, &config);
    println!("kept lines:\n{}", filtered.text);
    println!("-> {outcome:?}\n");

    // Gopher boundaries: 90 bullet lines per 100 is kept, 91 is dropped.
    for bullets in [90usize, 91] {
        let mut lines: Vec<String> =
            (0..bullets).map(|i| format!("• став {i} во листата.")).collect();
        lines.extend((bullets..100).map(|i| format!("Обична реченица {i}.")));
        let doc = Document::new("b", "demo", SourceKind::Web, &lines.join("\n"));
        let ratios = doc_ratios(&doc.text);
        let outcome = gopher_doc_filter(&doc, &config);
        println!(
            "bullet lines {bullets}/100 (ratio {:.2}) -> {:?}",
            ratios.bullet_line_ratio,
            outcome
        );
    }

    for ellipses in [30usize, 31] {
        let mut lines: Vec<String> =
            (0..ellipses).map(|i| format!("недовршена мисла {i}…")).collect();
        lines.extend((ellipses..100).map(|i| format!("Завршена реченица {i}.")));
        let doc = Document::new("e", "demo", SourceKind::Web, &lines.join("\n"));
        let outcome = gopher_doc_filter(&doc, &config);
        println!("ellipsis lines {ellipses}/100 -> {outcome:?}");
    }
}
