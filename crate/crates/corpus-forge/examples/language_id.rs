//! Train character n-gram profiles from the bundled samples and gate
//! documents on the confidence threshold.
//!
//! ```bash
//! cargo run --example language_id
//! ```

use corpus_forge::langid::{gate, train_ngram_profiles, LanguageClassifier};
use corpus_forge::model::{Document, PipelineConfig, SourceKind};

const MK: &str = include_str!("../assets/langid/mk.txt");
const EN: &str = include_str!("../assets/langid/en.txt");
const SR: &str = include_str!("../assets/langid/sr.txt");

fn main() {
    let classifier =
        train_ngram_profiles(&[(MK, "mk"), (EN, "en"), (SR, "sr")], 1..=4).unwrap();
    println!("trained profiles: {:?}\n", classifier.languages());

    let texts = [
        "Ова е реченица на македонски јазик и содржи доволно текст.",
        "The library opens early and the readers arrive before noon.",
        "Београд је главни град и лежи на ушћу две реке.",
        "Скопје е главен град. The city has many parks. Вардар тече.",
    ];
    for text in texts {
        let prediction = classifier.predict(text);
        println!("{:<4} conf={:.3}  {}", prediction.language, prediction.confidence, text);
    }

    // Sibling languages (mk vs sr) shrink the margin; that is the cue to
    // plug in a stronger external model. The gate below uses the bundled
    // two-language classifier, where the margin is a clean signal.
    let config = PipelineConfig::default(); // target "mk", threshold 0.65
    let bundled = corpus_forge::langid::default_classifier();
    println!("\ngate (target={}, threshold={}):", config.target_language, config.langid_threshold);
    for text in texts {
        let mut doc = Document::new("d", "demo", SourceKind::Web, text);
        let outcome = gate(&mut doc, bundled, &config);
        println!(
            "conf={:.3} {:<40} -> {:?}",
            doc.lang_confidence.unwrap(),
            text.chars().take(38).collect::<String>(),
            outcome
        );
    }
}
