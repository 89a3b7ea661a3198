#![allow(dead_code)] // each test binary uses a different helper subset

//! Shared fixture builders for the integration suites: deterministic
//! Macedonian-like word soup with injected violations for every rule.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corpus_forge::model::{Document, SourceKind};

pub const WORDS: [&str; 96] = [
    "вода", "град", "песна", "книга", "време", "куќа", "патот", "дете", "раце", "сонце",
    "месец", "гора", "поле", "камен", "ветер", "оган", "мост", "брег", "висина", "ноќ",
    "ден", "збор", "глас", "трева", "земја", "небо", "река", "езеро", "планина", "село",
    "улица", "пазар", "леб", "млеко", "сирење", "грозје", "јаболко", "круша", "цвет",
    "дрво", "лист", "корен", "семе", "жито", "нива", "овца", "коза", "крава", "коњ",
    "куче", "мачка", "птица", "риба", "пчела", "мед", "шеќер", "сол", "масло", "вино",
    "чаша", "маса", "стол", "врата", "прозорец", "покрив", "ѕид", "двор", "градина",
    "училиште", "болница", "театар", "музеј", "библиотека", "фабрика", "работа", "игра",
    "музика", "слика", "филм", "весник", "писмо", "прашање", "одговор", "мисла", "срце",
    "око", "рака", "нога", "глава", "коса", "насмевка", "радост", "тага", "надеж", "сила",
    "мир",
];

pub const EN_WORDS: [&str; 32] = [
    "water", "city", "song", "book", "time", "house", "road", "child", "hands", "sun",
    "moon", "forest", "field", "stone", "wind", "fire", "bridge", "shore", "height",
    "night", "day", "word", "voice", "grass", "earth", "sky", "river", "lake", "mountain",
    "village", "street", "market",
];

pub const FUNCTION_WORDS: [&str; 24] = [
    "на", "и", "во", "се", "од", "со", "за", "не", "да", "го", "ја", "ги", "е", "што",
    "кој", "која", "но", "или", "ако", "кога", "под", "над", "при", "меѓу",
];

pub const EN_FUNCTION_WORDS: [&str; 16] = [
    "the", "and", "in", "of", "to", "with", "for", "not", "that", "which", "but", "or",
    "if", "when", "under", "over",
];

pub fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS[rng.gen_range(0..WORDS.len())]
}

/// One prose-like sentence: content words from the pool interleaved with
/// function words, capitalized, with a terminal mark.
pub fn mk_sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(6..=13);
    let mut words: Vec<String> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && rng.gen_bool(0.45) {
            words.push(FUNCTION_WORDS[rng.gen_range(0..FUNCTION_WORDS.len())].to_string());
        }
        words.push(word(rng).to_string());
    }
    // A numeric filler keeps sentences globally unique.
    let slot = rng.gen_range(0..words.len());
    words[slot] = format!("{}{}", words[slot], rng.gen_range(0..100_000u32));
    let mut first = words[0].chars();
    words[0] = first.next().unwrap().to_uppercase().chain(first).collect();
    let terminal = match rng.gen_range(0..10) {
        0 => "!",
        1 => "?",
        _ => ".",
    };
    format!("{}{terminal}", words.join(" "))
}

pub fn mk_text(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    (0..sentences).map(|_| mk_sentence(rng)).collect::<Vec<_>>().join(" ")
}

pub fn en_text(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    (0..sentences)
        .map(|_| {
            let n = rng.gen_range(7..=12);
            let mut words: Vec<String> = Vec::with_capacity(n);
            for i in 0..n {
                if i > 0 && rng.gen_bool(0.45) {
                    words.push(
                        EN_FUNCTION_WORDS[rng.gen_range(0..EN_FUNCTION_WORDS.len())].to_string(),
                    );
                }
                words.push(EN_WORDS[rng.gen_range(0..EN_WORDS.len())].to_string());
            }
            let slot = rng.gen_range(0..words.len());
            words[slot] = format!("{}{}", words[slot], rng.gen_range(0..100_000u32));
            let mut first = words[0].chars();
            words[0] = first.next().unwrap().to_uppercase().chain(first).collect();
            format!("{}.", words.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Word-shingle set for brute-force Jaccard oracles.
pub fn shingle_set(text: &str, k: usize) -> HashSet<String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() < k {
        return HashSet::from([text.to_string()]);
    }
    words.windows(k).map(|w| w.join(" ")).collect()
}

pub fn exact_jaccard(a: &str, b: &str, k: usize) -> f64 {
    let sa = shingle_set(a, k);
    let sb = shingle_set(b, k);
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// A pair of word sequences where roughly `mutate_per_mille` of the second
/// copy's words were replaced.
pub fn mutated_pair(rng: &mut ChaCha8Rng, len: usize, mutate_per_mille: usize) -> (String, String) {
    let words: Vec<String> = (0..len)
        .map(|_| format!("{}{}", word(rng), rng.gen_range(0..10_000u32)))
        .collect();
    let mut mutated = words.clone();
    for w in mutated.iter_mut() {
        if rng.gen_range(0..1000) < mutate_per_mille {
            *w = format!("изменет{}", rng.gen_range(0..1_000_000u32));
        }
    }
    (words.join(" "), mutated.join(" "))
}

/// Deterministic fixture corpus of roughly `target_bytes` of text, with
/// violations injected for every pipeline rule. Returns documents in a
/// scrambled-but-deterministic order.
pub fn build_fixture(seed: u64, target_bytes: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs: Vec<Document> = Vec::new();
    let mut bytes = 0usize;
    let mut serial = 0usize;

    let boilerplate: Vec<String> = (0..12).map(|_| mk_sentence(&mut rng)).collect();
    let mut near_dup_targets: Vec<String> = Vec::new();

    while bytes < target_bytes {
        let id = format!("doc-{serial:06}");
        serial += 1;
        let roll = rng.gen_range(0..100);
        let doc = match roll {
            // PII-bearing but otherwise clean documents.
            0..=2 => {
                let n = rng.gen_range(6..14);
                let mut text = mk_text(&mut rng, n);
                text.push_str(&format!(
                    " Контакт: лице{}@пример.mk има мејл ana{}@example.mk и број +389 7{} 123 4{}.",
                    rng.gen_range(0..100u32),
                    rng.gen_range(0..100u32),
                    rng.gen_range(0..10u32),
                    rng.gen_range(10..100u32),
                ));
                Document::new(id, "hplt2", SourceKind::Web, &text)
            }
            // Fragment lines that the line filter trims or empties.
            3..=5 => {
                let mut lines = vec![mk_text(&mut rng, 2)];
                for _ in 0..rng.gen_range(2..6) {
                    lines.push(format!("{} {}", word(&mut rng), word(&mut rng)));
                }
                lines.push(mk_text(&mut rng, 2));
                Document::new(id, "fineweb2", SourceKind::Web, &lines.join("\n"))
            }
            // Bullet-heavy documents for the document filter.
            6..=7 => {
                let lines: Vec<String> = (0..40)
                    .map(|i| format!("• {} {} точка{i}.", word(&mut rng), word(&mut rng)))
                    .collect();
                Document::new(id, "fineweb2", SourceKind::Web, &lines.join("\n"))
            }
            // Ellipsis-heavy documents.
            8 => {
                let lines: Vec<String> = (0..30)
                    .map(|i| format!("{} {} мисла{i}…", word(&mut rng), word(&mut rng)))
                    .collect();
                Document::new(id, "fineweb2", SourceKind::Web, &lines.join("\n"))
            }
            // English contamination for the language gate.
            9..=11 => {
                Document::new(id, "fineweb2", SourceKind::Web, &en_text(&mut rng, 8))
            }
            // Boilerplate-sharing documents for sentence dedup.
            12..=14 => {
                let mut sentences = vec![mk_sentence(&mut rng)];
                sentences.push(boilerplate[rng.gen_range(0..boilerplate.len())].clone());
                let n = rng.gen_range(4..9);
                sentences.push(mk_text(&mut rng, n));
                Document::new(id, "hplt2", SourceKind::Web, &sentences.join(" "))
            }
            // Near duplicates of an earlier clean document.
            15..=16 if !near_dup_targets.is_empty() => {
                let target = &near_dup_targets[rng.gen_range(0..near_dup_targets.len())];
                let mut words: Vec<String> =
                    target.split_whitespace().map(str::to_string).collect();
                for w in words.iter_mut() {
                    if rng.gen_range(0..1000) < 15 {
                        *w = format!("вметнато{}", rng.gen_range(0..10_000u32));
                    }
                }
                Document::new(id, "macocu", SourceKind::Web, &words.join(" "))
            }
            // Long document-kind records for the chunker.
            17 => {
                let n = rng.gen_range(60..120);
                let text = mk_text(&mut rng, n);
                Document::new(id, "documents", SourceKind::Document, &text)
            }
            // Clean web documents, the bulk of the corpus.
            _ => {
                let source = if rng.gen_bool(0.5) { "hplt2" } else { "fineweb2" };
                let n = rng.gen_range(8..25);
                let text = mk_text(&mut rng, n);
                let doc = Document::new(id, source, SourceKind::Web, &text);
                if near_dup_targets.len() < 50 && doc.word_count() > 120 {
                    near_dup_targets.push(doc.text.clone());
                }
                doc
            }
        };
        bytes += doc.text.len();
        docs.push(doc);
    }

    docs
}
