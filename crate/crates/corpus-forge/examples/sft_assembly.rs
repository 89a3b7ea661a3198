//! Instruction-mix assembly: 2:1 weighted sampling, token-length coverage,
//! the turn-boundary cutoff, and chat-format serialization.
//!
//! ```bash
//! cargo run --example sft_assembly
//! ```

use corpus_forge::sft::{
    apply_cutoff, format_chat, length_profile, sample_mix, MixOptions, Role, SftRecord, Turn,
    WhitespaceEstimator, DEFAULT_SYSTEM_PROMPT,
};

fn record(id: &str, source: &str, favored: bool, question: &str, answer: &str) -> SftRecord {
    SftRecord {
        id: id.into(),
        source: source.into(),
        favored,
        turns: vec![
            Turn { role: Role::User, content: question.into() },
            Turn { role: Role::Assistant, content: answer.into() },
        ],
        token_estimate: 0,
    }
}

fn main() {
    let favored: Vec<SftRecord> = (0..300)
        .map(|i| {
            record(
                &format!("syn-{i}"),
                "synthetic",
                true,
                &format!("Прашање број {i} за културата?"),
                "Ова е внимателно напишан одговор на македонски јазик.",
            )
        })
        .collect();
    let translated: Vec<SftRecord> = (0..300)
        .map(|i| {
            record(
                &format!("tr-{i}"),
                "translated",
                false,
                &format!("Преведено прашање {i}?"),
                "Преведен одговор без рачна проверка.",
            )
        })
        .collect();

    let options = MixOptions { ratio: (2, 1), seed: 42, target_count: 900, ..Default::default() };
    let (mix, stats) = sample_mix(&[favored, translated], &options).unwrap();
    println!(
        "drew {} records: favored={} translated={} (recycled: {}/{})",
        mix.len(),
        stats.favored_drawn,
        stats.translated_drawn,
        stats.favored_recycled,
        stats.translated_recycled
    );

    let counter = WhitespaceEstimator;
    let profile = length_profile(&mix, &counter, 4096).unwrap();
    println!(
        "token lengths: min={} max={} coverage at 4096 = {:.1}%",
        profile.lengths.first().unwrap(),
        profile.lengths.last().unwrap(),
        profile.coverage_at_cutoff * 100.0
    );

    let (kept, outcome) = apply_cutoff(mix[0].clone(), 4096, &counter);
    println!("cutoff outcome for first record: {outcome:?}");

    let chat = format_chat(&kept.unwrap(), DEFAULT_SYSTEM_PROMPT).unwrap();
    println!("\nformatted training string:\n{chat}");
}
