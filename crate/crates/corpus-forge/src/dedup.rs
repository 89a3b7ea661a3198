//! Corpus-wide deduplication: exact repeated sentences first, then
//! near-duplicate documents via MinHash signatures and LSH banding.
//!
//! Both passes are keep-first by ascending document id, so results are
//! independent of arrival order and worker count. Hashing uses xxh3 with
//! seeds derived from the run seed; permutations are the classic
//! `(a*x + b) mod p` family over the Mersenne prime 2^61 - 1.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::model::{normalize_text, Document, FilterOutcome, PipelineConfig, ReasonCode};
use crate::sentence::segment_sentences;

pub use crate::sentence::split_sentences;

/// Seed namespace tags so the sentence hash, shingle hash, and band hash
/// never collide with each other even under the same run seed.
const SENTENCE_HASH_SEED: u64 = 0x5eed_0001;
const SHINGLE_SEED_TAG: u64 = 0x5eed_0002;
const BAND_SEED_TAG: u64 = 0x5eed_0003;

/// 64-bit key of a sentence, canonical-normalized, lowercased, and
/// whitespace-collapsed first so formatting variants collide.
pub fn sentence_key(sentence: &str) -> u64 {
    let normalized = normalize_text(sentence).to_lowercase();
    let collapsed: String =
        normalized.split_whitespace().collect::<Vec<_>>().join(" ");
    xxh3_64_with_seed(collapsed.as_bytes(), SENTENCE_HASH_SEED)
}

/// Outcome of deduplication for one document id.
pub type DocOutcome = (String, FilterOutcome);

/// Removes every repeated sentence corpus-wide, keeping the first occurrence
/// by (ascending document id, then position). Sentences shorter than
/// `min_sentence_chars` are too generic to deduplicate and always stay.
/// Documents whose deduplicable content is emptied are dropped.
///
/// Returns the surviving documents (ascending id) plus one outcome per
/// input document.
pub fn sentence_dedup(
    docs: Vec<Document>,
    config: &PipelineConfig,
) -> (Vec<Document>, Vec<DocOutcome>) {
    let mut docs = docs;
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    let mut seen: HashSet<u64> = HashSet::new();
    let mut kept_docs = Vec::with_capacity(docs.len());
    let mut outcomes = Vec::with_capacity(docs.len());

    for doc in docs {
        let spans = segment_sentences(&doc.text);
        let mut kept_text = String::with_capacity(doc.text.len());
        let mut removed = 0usize;
        let mut kept_sentences = 0usize;

        for span in &spans {
            let sentence = span.sentence(&doc.text);
            if sentence.is_empty() {
                kept_text.push_str(span.region(&doc.text));
                continue;
            }
            if sentence.chars().count() < config.min_sentence_chars {
                kept_text.push_str(span.region(&doc.text));
                kept_sentences += 1;
                continue;
            }
            if seen.insert(sentence_key(sentence)) {
                kept_text.push_str(span.region(&doc.text));
                kept_sentences += 1;
            } else {
                removed += 1;
            }
        }

        if removed == 0 {
            outcomes.push((doc.id.clone(), FilterOutcome::keep()));
            kept_docs.push(doc);
        } else if kept_sentences == 0 {
            outcomes.push((
                doc.id.clone(),
                FilterOutcome::drop_with(
                    ReasonCode::DuplicateSentence,
                    format!("all {removed} deduplicable sentences seen earlier"),
                ),
            ));
        } else {
            outcomes.push((
                doc.id.clone(),
                FilterOutcome::transformed_with(
                    ReasonCode::DuplicateSentence,
                    format!("sentences_removed={removed}"),
                ),
            ));
            kept_docs.push(Document { text: kept_text, ..doc });
        }
    }

    (kept_docs, outcomes)
}

/// MinHash sketch of one document's word-shingle set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashSignature {
    pub doc_id: String,
    pub values: Vec<u64>,
}

const MERSENNE_61: u64 = (1 << 61) - 1;

/// The permutation family `h_i(x) = (a_i * x + b_i) mod (2^61 - 1)`,
/// with parameters drawn from the run seed. Build once per run.
#[derive(Debug, Clone)]
pub struct MinHasher {
    params: Vec<(u64, u64)>,
    shingle_size: usize,
    shingle_seed: u64,
}

impl MinHasher {
    pub fn new(config: &PipelineConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHINGLE_SEED_TAG);
        let params = (0..config.minhash_permutations)
            .map(|_| (rng.gen_range(1..MERSENNE_61), rng.gen_range(0..MERSENNE_61)))
            .collect();
        MinHasher {
            params,
            shingle_size: config.shingle_size,
            shingle_seed: config.seed,
        }
    }

    pub fn permutations(&self) -> usize {
        self.params.len()
    }

    fn permute(a: u64, b: u64, x: u64) -> u64 {
        let product = (a as u128) * ((x % MERSENNE_61) as u128) + b as u128;
        (product % MERSENNE_61 as u128) as u64
    }

    /// Signature over the document's word shingles. A document with fewer
    /// words than the shingle size degenerates to one shingle: the whole
    /// text.
    pub fn signature(&self, doc: &Document) -> MinHashSignature {
        let words: Vec<&str> = doc.text.split_whitespace().collect();
        let mut mins = vec![u64::MAX; self.params.len()];

        let mut update = |shingle: &str| {
            let base = xxh3_64_with_seed(shingle.as_bytes(), self.shingle_seed);
            for (slot, (a, b)) in mins.iter_mut().zip(&self.params) {
                let h = Self::permute(*a, *b, base);
                if h < *slot {
                    *slot = h;
                }
            }
        };

        if words.len() < self.shingle_size {
            update(&doc.text);
        } else {
            for window in words.windows(self.shingle_size) {
                update(&window.join(" "));
            }
        }

        MinHashSignature { doc_id: doc.id.clone(), values: mins }
    }
}

/// Convenience wrapper building the permutation family on the fly; prefer
/// [`MinHasher`] when signing many documents.
pub fn minhash_signature(doc: &Document, config: &PipelineConfig) -> MinHashSignature {
    MinHasher::new(config).signature(doc)
}

/// Fraction of matching signature slots: the MinHash Jaccard estimate.
pub fn estimate_similarity(a: &MinHashSignature, b: &MinHashSignature) -> f64 {
    assert_eq!(a.values.len(), b.values.len(), "signatures from different configs");
    if a.values.is_empty() {
        return 0.0;
    }
    let matching = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    matching as f64 / a.values.len() as f64
}

/// Similarity at which a pair collides in some band with probability 1/2,
/// the usual `(1/bands)^(1/rows)` rule; verification uses it as the floor.
pub fn band_threshold(bands: usize, rows: usize) -> f64 {
    (1.0 / bands as f64).powf(1.0 / rows as f64)
}

fn band_hashes(signature: &MinHashSignature, bands: usize, rows: usize, seed: u64) -> Vec<u64> {
    (0..bands)
        .map(|band| {
            let start = band * rows;
            let mut bytes = Vec::with_capacity(rows * 8);
            for value in &signature.values[start..start + rows] {
                bytes.extend_from_slice(&value.to_le_bytes());
            }
            xxh3_64_with_seed(&bytes, seed ^ BAND_SEED_TAG ^ band as u64)
        })
        .collect()
}

/// True when two signatures agree on every row of at least one band —
/// the LSH candidate condition.
pub fn bands_collide(a: &MinHashSignature, b: &MinHashSignature, bands: usize, rows: usize) -> bool {
    (0..bands).any(|band| {
        let start = band * rows;
        a.values[start..start + rows] == b.values[start..start + rows]
    })
}

/// Banded index from band hash to the documents (by position) holding it.
/// A document appears at most once per band table.
#[derive(Debug, Default)]
pub struct LshIndex {
    bands: usize,
    rows: usize,
    seed: u64,
    tables: Vec<HashMap<u64, Vec<usize>>>,
}

impl LshIndex {
    pub fn new(bands: usize, rows: usize, seed: u64) -> Self {
        LshIndex { bands, rows, seed, tables: (0..bands).map(|_| HashMap::new()).collect() }
    }

    /// Inserts must happen in ascending position order; bucket lists then
    /// stay sorted, which keeps candidate scans deterministic.
    pub fn insert(&mut self, position: usize, signature: &MinHashSignature) {
        for (table, hash) in self
            .tables
            .iter_mut()
            .zip(band_hashes(signature, self.bands, self.rows, self.seed))
        {
            table.entry(hash).or_default().push(position);
        }
    }

    /// Positions of earlier documents sharing at least one band, ascending.
    pub fn earlier_candidates(&self, position: usize, signature: &MinHashSignature) -> Vec<usize> {
        let mut candidates: Vec<usize> = Vec::new();
        for (table, hash) in self
            .tables
            .iter()
            .zip(band_hashes(signature, self.bands, self.rows, self.seed))
        {
            if let Some(bucket) = table.get(&hash) {
                candidates.extend(bucket.iter().take_while(|p| **p < position));
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        candidates
    }
}

/// One dropped-document record in the dedup report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupRecord {
    pub dropped_id: String,
    pub kept_id: String,
    pub estimated_similarity: f64,
}

/// Near-duplicate document removal. Two passes: build the banded index over
/// every signature, then walk documents in ascending id order and drop each
/// one whose signature similarity to some earlier-id band-mate reaches the
/// band-implied threshold. Signature computation is parallel; both passes
/// over the frozen index are sequential, so results never depend on
/// scheduling.
pub fn lsh_dedup(
    docs: Vec<Document>,
    config: &PipelineConfig,
) -> (Vec<Document>, Vec<DedupRecord>, Vec<DocOutcome>) {
    let mut docs = docs;
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    let hasher = MinHasher::new(config);
    let signatures: Vec<MinHashSignature> =
        docs.par_iter().map(|doc| hasher.signature(doc)).collect();

    let mut index = LshIndex::new(config.lsh_bands, config.lsh_rows, config.seed);
    for (position, signature) in signatures.iter().enumerate() {
        index.insert(position, signature);
    }

    let threshold = band_threshold(config.lsh_bands, config.lsh_rows);
    let mut kept_docs = Vec::with_capacity(docs.len());
    let mut records = Vec::new();
    let mut outcomes = Vec::with_capacity(docs.len());

    for (position, doc) in docs.into_iter().enumerate() {
        let signature = &signatures[position];
        let mut best: Option<(f64, usize)> = None;
        for earlier in index.earlier_candidates(position, signature) {
            let similarity = estimate_similarity(signature, &signatures[earlier]);
            if similarity >= threshold {
                let better = match best {
                    Some((s, p)) => similarity > s || (similarity == s && earlier < p),
                    None => true,
                };
                if better {
                    best = Some((similarity, earlier));
                }
            }
        }
        match best {
            Some((similarity, earlier)) => {
                let kept_id = signatures[earlier].doc_id.clone();
                outcomes.push((
                    doc.id.clone(),
                    FilterOutcome::drop_with(
                        ReasonCode::NearDuplicateDoc,
                        format!("near duplicate of {kept_id} (est {similarity:.4})"),
                    ),
                ));
                records.push(DedupRecord {
                    dropped_id: doc.id,
                    kept_id,
                    estimated_similarity: similarity,
                });
            }
            None => {
                outcomes.push((doc.id.clone(), FilterOutcome::keep()));
                kept_docs.push(doc);
            }
        }
    }

    (kept_docs, records, outcomes)
}
