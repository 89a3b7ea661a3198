//! Replace emails, IPs, and phone numbers with placeholder tokens.
//!
//! ```bash
//! cargo run --example pii_scrub
//! ```

use corpus_forge::model::{Document, SourceKind};
use corpus_forge::pii::{scrub, PiiRuleSet};

fn main() {
    let rules = PiiRuleSet::default();
    let samples = [
        "Пиши на ana@example.mk или јави се на +389 70 123 456.",
        "Серверот 192.168.1.1 и резервниот 2001:db8::1 беа недостапни.",
        "Фиксни броеви: 02/3110-000 и (02) 3212 100 секој работен ден.",
        "Обичен текст без лични податоци од 2021 година.",
    ];

    for (i, text) in samples.iter().enumerate() {
        let doc = Document::new(format!("d{i}"), "demo", SourceKind::Web, text);
        let (scrubbed, outcome) = scrub(doc, &rules);
        println!("in:  {text}");
        println!("out: {}", scrubbed.text);
        println!("     -> {outcome:?}\n");
    }
}
