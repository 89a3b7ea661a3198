//! MinHash signatures, Jaccard estimation against the exact value, and
//! LSH-banded near-duplicate removal.
//!
//! ```bash
//! cargo run --example minhash_dedup
//! ```

use std::collections::HashSet;

use corpus_forge::dedup::{band_threshold, estimate_similarity, lsh_dedup, MinHasher};
use corpus_forge::model::{Document, PipelineConfig, SourceKind};

fn exact_jaccard(a: &str, b: &str, k: usize) -> f64 {
    let shingles = |t: &str| -> HashSet<String> {
        let words: Vec<&str> = t.split_whitespace().collect();
        words.windows(k).map(|w| w.join(" ")).collect()
    };
    let (sa, sb) = (shingles(a), shingles(b));
    sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64
}

fn main() {
    let config = PipelineConfig::default(); // 128 perms, 16 bands x 8 rows
    let hasher = MinHasher::new(&config);

    let base: Vec<String> = (0..200).map(|i| format!("зборче{i}")).collect();
    let mut near = base.clone();
    for i in (0..near.len()).step_by(50) {
        near[i] = format!("изменето{i}");
    }
    let far: Vec<String> = (0..200).map(|i| format!("сосемдруго{i}")).collect();

    let a = Document::new("a", "demo", SourceKind::Web, &base.join(" "));
    let b = Document::new("b", "demo", SourceKind::Web, &near.join(" "));
    let c = Document::new("c", "demo", SourceKind::Web, &far.join(" "));

    let (sig_a, sig_b, sig_c) =
        (hasher.signature(&a), hasher.signature(&b), hasher.signature(&c));

    println!("permutations = {}", hasher.permutations());
    println!(
        "a~b estimated {:.3} vs exact {:.3}",
        estimate_similarity(&sig_a, &sig_b),
        exact_jaccard(&a.text, &b.text, config.shingle_size)
    );
    println!(
        "a~c estimated {:.3} vs exact {:.3}",
        estimate_similarity(&sig_a, &sig_c),
        exact_jaccard(&a.text, &c.text, config.shingle_size)
    );
    println!(
        "band-implied similarity threshold (16 bands x 8 rows) = {:.4}\n",
        band_threshold(config.lsh_bands, config.lsh_rows)
    );

    let (kept, records, _) = lsh_dedup(vec![a, b, c], &config);
    println!("kept: {:?}", kept.iter().map(|d| d.id.as_str()).collect::<Vec<_>>());
    for record in records {
        println!(
            "dropped {} (near duplicate of {}, estimated {:.3})",
            record.dropped_id, record.kept_id, record.estimated_similarity
        );
    }
}
