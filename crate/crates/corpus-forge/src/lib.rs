//! Deterministic corpus curation for low-resource-language LLM training
//! data: a seven-stage filtering funnel (PII scrubbing, line and document
//! quality rules, language gating, sentence dedup, chunking, MinHash/LSH
//! near-dedup), an instruction-mix assembler, and a placeholder-preserving
//! benchmark templater.
//!
//! Everything is seeded and keep-first-by-id, so a run's outputs are
//! byte-identical across repeats and worker counts. Start from
//! [`pipeline::Pipeline`] for the funnel, [`sft`] for instruction mixes, and
//! [`mcq`] for benchmark templating; the `corpus-forge` binary wraps these
//! as subcommands, and each capability has a runnable example under
//! `examples/`.

pub mod chunk;
pub mod config;
pub mod dedup;
pub mod io;
pub mod langid;
pub mod mcq;
pub mod model;
pub mod pii;
pub mod pipeline;
pub mod quality;
pub mod report;
pub mod sentence;
pub mod sft;

pub use model::{
    validate_config, Decision, Document, FilterOutcome, PipelineConfig, ReasonCode, SourceKind,
};
pub use pipeline::{Pipeline, RunOptions, RunPaths, Stage, StagePlan};
