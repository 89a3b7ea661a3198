//! Placeholder-preserving template translation for multiple-choice items:
//! the happy path, whitespace recovery, and the review queue.
//!
//! ```bash
//! cargo run --example mcq_templates
//! ```

use corpus_forge::mcq::{
    expand_choices, make_template, strip_placeholder, translate_item, translate_template,
    IdentityTranslator, McqItem, TranslateOutcome, DEFAULT_PLACEHOLDER,
};

fn main() {
    let item = McqItem {
        id: "arc-easy-42".into(),
        stem: "Ладнокрвните животни често се".into(),
        choices: vec!["брзи".into(), "големи".into(), "без влакна".into(), "бавни".into()],
        answer_index: 3,
    };

    let templated = make_template(&item, DEFAULT_PLACEHOLDER).unwrap();
    println!("template:   {}", templated.template);

    // A translator that keeps the placeholder: the template survives, the
    // stem comes back, and candidates expand per choice.
    match translate_template(&templated, &IdentityTranslator) {
        TranslateOutcome::Clean(t) => {
            let stem = strip_placeholder(&t).unwrap();
            println!("stripped:   {stem}");
            for candidate in expand_choices(&stem, &t.choices) {
                println!("candidate:  {candidate}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }

    // A translator that mangles whitespace inside the placeholder is
    // recovered by the tolerant matcher.
    let mangling = |text: &str| text.replace("⟦X⟧", "⟦ X ⟧");
    println!("\nmangling translator: {:?}", translate_template(&templated, &mangling));

    // A translator that deletes the placeholder routes the item to review.
    let deleting = |text: &str| text.replace("⟦X⟧", "");
    let mut review = Vec::new();
    let out = translate_item(&item, DEFAULT_PLACEHOLDER, &deleting, &mut review).unwrap();
    println!("\ndeleting translator: output={out:?}");
    for entry in &review {
        println!("review queue: {}", serde_json::to_string(entry).unwrap());
    }
}
