//! Stage tallies and the source-distribution table in all three formats.
//!
//! ```bash
//! cargo run --example funnel_report
//! ```

use corpus_forge::model::{Document, ReasonCode, SourceKind};
use corpus_forge::report::{render_table, source_distribution, tally, FunnelReport, TableFormat};

fn doc(id: &str, source: &str, words: usize) -> Document {
    let text: Vec<String> = (0..words).map(|i| format!("збор{i}")).collect();
    Document::new(id, source, SourceKind::Web, &text.join(" "))
}

fn main() {
    let before = vec![
        doc("a", "hplt2", 1200),
        doc("b", "hplt2", 800),
        doc("c", "fineweb2", 900),
        doc("d", "wikipedia", 300),
        doc("e", "fineweb2", 400),
    ];
    // Pretend the stage dropped "b" for bullets and "e" for language.
    let after: Vec<Document> =
        before.iter().filter(|d| d.id != "b" && d.id != "e").cloned().collect();
    let drops = vec![ReasonCode::BulletRatio, ReasonCode::LangIdBelowThreshold];

    let report = FunnelReport {
        stages: vec![tally("demo-stage", &before, &after, &drops)],
        sources_in: source_distribution(&before),
        sources_out: source_distribution(&after),
    };

    println!("== markdown ==\n{}", render_table(&report, TableFormat::Markdown));
    println!("== csv ==\n{}", render_table(&report, TableFormat::Csv));
    println!("== json ==\n{}", render_table(&report, TableFormat::Json));
}
