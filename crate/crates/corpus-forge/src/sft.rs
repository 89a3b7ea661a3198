//! Instruction-tuning mix assembly: weighted sampling over favored vs
//! translated pools, token-length analysis with a cutoff, and chat-format
//! serialization with the default system prompt.
//!
//! The training-string template is ChatML-like:
//!
//! ```text
//! <|im_start|>system
//! ...<|im_end|>
//! <|im_start|>user
//! ...<|im_end|>
//! <|im_start|>assistant
//! ...<|im_end|>
//! ```
//!
//! Turn contents must not contain the markers; formatting rejects records
//! that would make the serialization ambiguous.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{word_count, FilterOutcome, ReasonCode};

/// System prompt injected when a record carries none (Macedonian assistant
/// instructions).
pub const DEFAULT_SYSTEM_PROMPT: &str = include_str!("../assets/system_prompt_mk.txt");

pub const TURN_START: &str = "<|im_start|>";
pub const TURN_END: &str = "<|im_end|>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub content: String,
}

/// One multi-turn instruction record. `favored` marks human-supervised or
/// synthetic provenance, as opposed to plain machine translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub id: String,
    pub source: String,
    pub favored: bool,
    pub turns: Vec<Turn>,
    #[serde(default)]
    pub token_estimate: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SftError {
    #[error("record {id}: {problem}")]
    MalformedTurnOrder { id: String, problem: String },
    #[error("record {id}: turn content contains a reserved marker")]
    ReservedMarker { id: String },
    #[error("the {0} pool is empty but its ratio weight is positive")]
    EmptyPool(&'static str),
    #[error("ratio weights must not both be zero")]
    ZeroRatio,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
}

/// Enforces: optional leading system turn, then user/assistant alternation
/// starting with user, with at least one of each.
pub fn validate_record(record: &SftRecord) -> Result<(), SftError> {
    let err = |problem: &str| SftError::MalformedTurnOrder {
        id: record.id.clone(),
        problem: problem.to_string(),
    };
    let mut turns = record.turns.iter().peekable();
    if turns.peek().map(|t| t.role) == Some(Role::System) {
        turns.next();
    }
    let mut expect = Role::User;
    let mut users = 0;
    let mut assistants = 0;
    for turn in turns {
        if turn.role == Role::System {
            return Err(err("system turn not in leading position"));
        }
        if turn.role != expect {
            return Err(err(&format!(
                "expected {} turn, found {}",
                expect.as_str(),
                turn.role.as_str()
            )));
        }
        match turn.role {
            Role::User => users += 1,
            Role::Assistant => assistants += 1,
            Role::System => unreachable!(),
        }
        expect = if expect == Role::User { Role::Assistant } else { Role::User };
    }
    if users == 0 || assistants == 0 {
        return Err(err("needs at least one user and one assistant turn"));
    }
    Ok(())
}

/// Pluggable token counter. Token counts everywhere in this module come
/// through this trait so a model tokenizer can be swapped in.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> u64;
}

/// Default estimator: whitespace words x 1.4, rounded up. A documented
/// approximation standing in for a model tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceEstimator;

impl TokenCounter for WhitespaceEstimator {
    fn count(&self, text: &str) -> u64 {
        (word_count(text) as f64 * 1.4).ceil() as u64
    }
}

pub fn record_tokens(record: &SftRecord, counter: &dyn TokenCounter) -> u64 {
    record.turns.iter().map(|t| counter.count(&t.content)).sum()
}

/// Whether the 2:1 ratio is accounted in records or in words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioBasis {
    #[default]
    Records,
    Words,
}

#[derive(Debug, Clone)]
pub struct MixOptions {
    /// favored : translated, default 2:1.
    pub ratio: (u32, u32),
    pub seed: u64,
    pub target_count: usize,
    pub basis: RatioBasis,
}

impl Default for MixOptions {
    fn default() -> Self {
        MixOptions { ratio: (2, 1), seed: 42, target_count: 0, basis: RatioBasis::Records }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MixStats {
    pub favored_drawn: usize,
    pub translated_drawn: usize,
    pub favored_words: u64,
    pub translated_words: u64,
    /// Set when a pool was exhausted and reshuffled to keep drawing.
    pub favored_recycled: bool,
    pub translated_recycled: bool,
}

/// Uniform-without-replacement sampler over one pool; reshuffles on
/// exhaustion and flags the recycle.
struct PoolSampler<'a> {
    records: &'a [SftRecord],
    order: Vec<usize>,
    cursor: usize,
    recycled: bool,
}

impl<'a> PoolSampler<'a> {
    fn new(records: &'a [SftRecord], rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.shuffle(rng);
        PoolSampler { records, order, cursor: 0, recycled: false }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> &'a SftRecord {
        if self.cursor >= self.order.len() {
            self.order.shuffle(rng);
            self.cursor = 0;
            self.recycled = true;
        }
        let record = &self.records[self.order[self.cursor]];
        self.cursor += 1;
        record
    }
}

/// Samples `target_count` records from the pooled sources with the given
/// favored:translated ratio. Pool membership comes from each record's
/// `favored` flag. Record basis draws the pool by seeded coin; word basis
/// picks whichever pool lags its word share (deterministic greedy), with
/// randomness only inside the pools.
pub fn sample_mix(
    sources: &[Vec<SftRecord>],
    options: &MixOptions,
) -> Result<(Vec<SftRecord>, MixStats), SftError> {
    let (fav_w, tr_w) = options.ratio;
    if fav_w == 0 && tr_w == 0 {
        return Err(SftError::ZeroRatio);
    }

    let favored: Vec<SftRecord> = sources
        .iter()
        .flatten()
        .filter(|r| r.favored)
        .cloned()
        .collect();
    let translated: Vec<SftRecord> = sources
        .iter()
        .flatten()
        .filter(|r| !r.favored)
        .cloned()
        .collect();

    if fav_w > 0 && favored.is_empty() {
        return Err(SftError::EmptyPool("favored"));
    }
    if tr_w > 0 && translated.is_empty() {
        return Err(SftError::EmptyPool("translated"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut favored_pool = PoolSampler::new(&favored, &mut rng);
    let mut translated_pool = PoolSampler::new(&translated, &mut rng);
    let p_favored = fav_w as f64 / (fav_w + tr_w) as f64;

    let mut out = Vec::with_capacity(options.target_count);
    let mut stats = MixStats::default();

    for _ in 0..options.target_count {
        let take_favored = match options.basis {
            RatioBasis::Records => {
                if fav_w == 0 {
                    false
                } else if tr_w == 0 {
                    true
                } else {
                    rng.gen::<f64>() < p_favored
                }
            }
            RatioBasis::Words => {
                // Pick the pool whose word share lags the target ratio.
                tr_w == 0
                    || (fav_w > 0
                        && stats.favored_words * tr_w as u64
                            <= stats.translated_words * fav_w as u64)
            }
        };
        let record = if take_favored {
            let r = favored_pool.draw(&mut rng);
            stats.favored_drawn += 1;
            stats.favored_words += r.turns.iter().map(|t| word_count(&t.content) as u64).sum::<u64>();
            r
        } else {
            let r = translated_pool.draw(&mut rng);
            stats.translated_drawn += 1;
            stats.translated_words +=
                r.turns.iter().map(|t| word_count(&t.content) as u64).sum::<u64>();
            r
        };
        out.push(record.clone());
    }

    stats.favored_recycled = favored_pool.recycled;
    stats.translated_recycled = translated_pool.recycled;
    Ok((out, stats))
}

/// Empirical token-length distribution with the coverage at one cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthProfile {
    /// Ascending token estimates, one per record.
    pub lengths: Vec<u64>,
    pub cutoff: u64,
    /// Fraction of records with length <= cutoff.
    pub coverage_at_cutoff: f64,
}

impl LengthProfile {
    /// Coverage the profile would report at a different cutoff.
    pub fn coverage_at(&self, cutoff: u64) -> f64 {
        if self.lengths.is_empty() {
            return 0.0;
        }
        let covered = self.lengths.partition_point(|l| *l <= cutoff);
        covered as f64 / self.lengths.len() as f64
    }
}

pub fn length_profile(
    records: &[SftRecord],
    counter: &dyn TokenCounter,
    cutoff: u64,
) -> Result<LengthProfile, SftError> {
    if cutoff < 1 {
        return Err(SftError::ZeroCutoff);
    }
    let mut lengths: Vec<u64> = records.iter().map(|r| record_tokens(r, counter)).collect();
    lengths.sort_unstable();
    let mut profile = LengthProfile { lengths, cutoff, coverage_at_cutoff: 0.0 };
    profile.coverage_at_cutoff = profile.coverage_at(cutoff);
    Ok(profile)
}

/// Serializes a record to its training string. The system prompt is injected
/// as the first turn when the record carries none; an existing system turn
/// is kept as-is, never duplicated.
pub fn format_chat(record: &SftRecord, system_prompt: &str) -> Result<String, SftError> {
    validate_record(record)?;
    for turn in &record.turns {
        if turn.content.contains(TURN_START) || turn.content.contains(TURN_END) {
            return Err(SftError::ReservedMarker { id: record.id.clone() });
        }
    }
    let mut out = String::new();
    let has_system = record.turns.first().map(|t| t.role) == Some(Role::System);
    if !has_system {
        push_turn(&mut out, Role::System, system_prompt.trim_end_matches('\n'));
    }
    for turn in &record.turns {
        push_turn(&mut out, turn.role, &turn.content);
    }
    Ok(out)
}

fn push_turn(out: &mut String, role: Role, content: &str) {
    out.push_str(TURN_START);
    out.push_str(role.as_str());
    out.push('\n');
    out.push_str(content);
    out.push_str(TURN_END);
    out.push('\n');
}

/// Enforces the token budget: records that fit pass unchanged; longer ones
/// are truncated at the last whole user+assistant exchange that fits (the
/// system turn always counts against the budget); a record whose first
/// exchange alone exceeds the budget is dropped.
pub fn apply_cutoff(
    record: SftRecord,
    max_tokens: u64,
    counter: &dyn TokenCounter,
) -> (Option<SftRecord>, FilterOutcome) {
    let total = record_tokens(&record, counter);
    if total <= max_tokens {
        return (Some(record), FilterOutcome::keep());
    }

    let system: Vec<&Turn> =
        record.turns.iter().take_while(|t| t.role == Role::System).collect();
    let rest: Vec<&Turn> = record.turns.iter().skip(system.len()).collect();
    let mut budget_used: u64 = system.iter().map(|t| counter.count(&t.content)).sum();

    let mut kept_turns: Vec<Turn> = system.into_iter().cloned().collect();
    let mut exchanges_kept = 0usize;
    let total_exchanges = rest.len() / 2;

    for exchange in rest.chunks(2) {
        if exchange.len() < 2 {
            break; // dangling un-paired turn never survives truncation
        }
        let cost: u64 = exchange.iter().map(|t| counter.count(&t.content)).sum();
        if budget_used + cost > max_tokens {
            break;
        }
        budget_used += cost;
        kept_turns.extend(exchange.iter().map(|t| (*t).clone()));
        exchanges_kept += 1;
    }

    if exchanges_kept == 0 {
        let outcome = FilterOutcome::drop_with(
            ReasonCode::OversizedExchange,
            format!("first exchange exceeds {max_tokens} tokens"),
        );
        return (None, outcome);
    }

    let truncated = SftRecord {
        token_estimate: budget_used,
        turns: kept_turns,
        ..record
    };
    let outcome = FilterOutcome::transformed_with(
        ReasonCode::ExchangeTruncated,
        format!("kept {exchanges_kept} of {total_exchanges} exchanges"),
    );
    (Some(truncated), outcome)
}
