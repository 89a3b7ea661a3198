//! Stage orchestration: the filtering funnel, its ordering contract, and the
//! file-level run with reports.
//!
//! Stage order defaults to pii, c4, gopher, langid, sentence-dedup, chunk,
//! minhash-dedup. A plan may disable stages freely, but reordering the
//! survivors requires an explicit override. Per-document stages run on a
//! worker pool; dedup stages are two-pass over frozen state, so every output
//! is independent of the worker count.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::chunk::chunk_stage;
use crate::dedup::{lsh_dedup, sentence_dedup, DedupRecord};
use crate::io::{
    read_jsonl, read_text_dir, write_jsonl, write_sidecar, IngestError, ReadOptions, SidecarEntry,
};
use crate::langid::{gate, LangIdError, LanguageClassifier};
use crate::model::{
    validate_config, ConfigError, Document, FilterOutcome, PipelineConfig, ReasonCode,
};
use crate::pii::{scrub, PiiRuleSet};
use crate::quality::{c4_line_filter, gopher_doc_filter};
use crate::report::{source_distribution, total_words, FunnelReport, StageRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Pii,
    C4,
    Gopher,
    LangId,
    SentenceDedup,
    Chunk,
    MinhashDedup,
}

impl Stage {
    pub const DEFAULT_ORDER: [Stage; 7] = [
        Stage::Pii,
        Stage::C4,
        Stage::Gopher,
        Stage::LangId,
        Stage::SentenceDedup,
        Stage::Chunk,
        Stage::MinhashDedup,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Pii => "pii",
            Stage::C4 => "c4",
            Stage::Gopher => "gopher",
            Stage::LangId => "langid",
            Stage::SentenceDedup => "sentence-dedup",
            Stage::Chunk => "chunk",
            Stage::MinhashDedup => "minhash-dedup",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::DEFAULT_ORDER
            .iter()
            .find(|stage| stage.name() == s)
            .copied()
            .ok_or_else(|| PipelineError::Plan(format!("unknown stage {s:?}")))
    }
}

/// An ordered list of enabled stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    stages: Vec<Stage>,
}

impl Default for StagePlan {
    fn default() -> Self {
        StagePlan { stages: Stage::DEFAULT_ORDER.to_vec() }
    }
}

impl StagePlan {
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Builds a plan from comma-separated stage names. Subsets of the
    /// default order are always fine; an order that disagrees with the
    /// default needs `allow_reorder`.
    pub fn from_names(names: &str, allow_reorder: bool) -> Result<Self, PipelineError> {
        let mut stages = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let stage: Stage = name.parse()?;
            if stages.contains(&stage) {
                return Err(PipelineError::Plan(format!("stage {name:?} listed twice")));
            }
            stages.push(stage);
        }
        if stages.is_empty() {
            return Err(PipelineError::Plan("plan has no stages".to_string()));
        }
        if !allow_reorder {
            let default_positions: Vec<usize> = stages
                .iter()
                .map(|s| Stage::DEFAULT_ORDER.iter().position(|d| d == s).unwrap())
                .collect();
            if default_positions.windows(2).any(|w| w[0] > w[1]) {
                return Err(PipelineError::Plan(
                    "plan reorders stages; pass --allow-reorder to confirm".to_string(),
                ));
            }
        }
        Ok(StagePlan { stages })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    LangId(#[from] LangIdError),
    #[error("invalid stage plan: {0}")]
    Plan(String),
    #[error("duplicate document id {id:?} in strict mode")]
    DuplicateId { id: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One dropped document, for the structured event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropEvent {
    pub stage: &'static str,
    pub id: String,
    pub reason: ReasonCode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// In-memory result of a funnel run.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelOutput {
    pub docs: Vec<Document>,
    pub report: FunnelReport,
    pub dedup_records: Vec<DedupRecord>,
    pub drops: Vec<DropEvent>,
}

pub struct Pipeline<'a> {
    pub plan: &'a StagePlan,
    pub config: &'a PipelineConfig,
    pub pii_rules: &'a PiiRuleSet,
    pub classifier: &'a dyn LanguageClassifier,
}

/// Order-preserving parallel map for drop/transform stages.
fn apply_per_doc<F>(
    stage: Stage,
    docs: Vec<Document>,
    f: F,
) -> (Vec<Document>, Vec<DropEvent>, StageRecord)
where
    F: Fn(Document) -> (Option<Document>, FilterOutcome) + Sync,
{
    let docs_in = docs.len() as u64;
    let words_in = total_words(&docs);

    let results: Vec<(Option<Document>, String, FilterOutcome)> = docs
        .into_par_iter()
        .map(|doc| {
            let id = doc.id.clone();
            let (out, outcome) = f(doc);
            (out, id, outcome)
        })
        .collect();

    let mut kept = Vec::with_capacity(results.len());
    let mut drops = Vec::new();
    let mut drop_reasons = std::collections::BTreeMap::new();
    for (doc, id, outcome) in results {
        match doc {
            Some(doc) => kept.push(doc),
            None => {
                let reason = outcome.reason().expect("dropped documents carry a reason");
                *drop_reasons.entry(reason).or_insert(0u64) += 1;
                let detail = match outcome {
                    FilterOutcome::Drop { detail, .. } => detail,
                    _ => None,
                };
                drops.push(DropEvent { stage: stage.name(), id, reason, detail });
            }
        }
    }

    let record = StageRecord {
        stage: stage.name().to_string(),
        docs_in,
        docs_out: docs_in - drops.len() as u64,
        records_out: kept.len() as u64,
        words_in,
        words_out: total_words(&kept),
        drop_reasons,
    };
    (kept, drops, record)
}

fn outcome_stage(
    stage: Stage,
    docs: Vec<Document>,
    kept: Vec<Document>,
    outcomes: Vec<(String, FilterOutcome)>,
) -> (Vec<Document>, Vec<DropEvent>, StageRecord) {
    let docs_in = docs.len() as u64;
    let words_in = total_words(&docs);
    let mut drops = Vec::new();
    let mut drop_reasons = std::collections::BTreeMap::new();
    for (id, outcome) in outcomes {
        if outcome.is_drop() {
            let reason = outcome.reason().expect("drop carries reason");
            *drop_reasons.entry(reason).or_insert(0u64) += 1;
            let detail = match outcome {
                FilterOutcome::Drop { detail, .. } => detail,
                _ => None,
            };
            drops.push(DropEvent { stage: stage.name(), id, reason, detail });
        }
    }
    let record = StageRecord {
        stage: stage.name().to_string(),
        docs_in,
        docs_out: docs_in - drops.len() as u64,
        records_out: kept.len() as u64,
        words_in,
        words_out: total_words(&kept),
        drop_reasons,
    };
    (kept, drops, record)
}

impl Pipeline<'_> {
    /// Runs the funnel over in-memory documents. Documents are processed in
    /// ascending id order; ids must already be unique.
    pub fn run_docs(&self, mut docs: Vec<Document>) -> Result<FunnelOutput, PipelineError> {
        let config = validate_config(self.config.clone())?;
        docs.sort_by(|a, b| a.id.cmp(&b.id));

        let sources_in = source_distribution(&docs);
        let mut report = FunnelReport::default();
        let mut all_drops: Vec<DropEvent> = Vec::new();
        let mut dedup_records: Vec<DedupRecord> = Vec::new();

        for stage in self.plan.stages() {
            let (kept, drops, record) = match stage {
                Stage::Pii => apply_per_doc(*stage, docs, |doc| {
                    let (doc, outcome) = scrub(doc, self.pii_rules);
                    (Some(doc), outcome)
                }),
                Stage::C4 => apply_per_doc(*stage, docs, |doc| {
                    let (doc, outcome) = c4_line_filter(doc, &config);
                    if outcome.is_drop() {
                        (None, outcome)
                    } else {
                        (Some(doc), outcome)
                    }
                }),
                Stage::Gopher => apply_per_doc(*stage, docs, |doc| {
                    let outcome = gopher_doc_filter(&doc, &config);
                    if outcome.is_drop() {
                        (None, outcome)
                    } else {
                        (Some(doc), outcome)
                    }
                }),
                Stage::LangId => apply_per_doc(*stage, docs, |mut doc| {
                    let outcome = gate(&mut doc, self.classifier, &config);
                    if outcome.is_drop() {
                        (None, outcome)
                    } else {
                        (Some(doc), outcome)
                    }
                }),
                Stage::SentenceDedup => {
                    let before = docs;
                    let (kept, outcomes) = sentence_dedup(before.clone(), &config);
                    outcome_stage(*stage, before, kept, outcomes)
                }
                Stage::Chunk => {
                    let docs_in = docs.len() as u64;
                    let words_in = total_words(&docs);
                    let expanded: Vec<Vec<Document>> = docs
                        .into_par_iter()
                        .map(|doc| chunk_stage(doc, &config))
                        .collect();
                    let kept: Vec<Document> = expanded.into_iter().flatten().collect();
                    let record = StageRecord {
                        stage: stage.name().to_string(),
                        docs_in,
                        docs_out: docs_in,
                        records_out: kept.len() as u64,
                        words_in,
                        words_out: total_words(&kept),
                        drop_reasons: Default::default(),
                    };
                    (kept, Vec::new(), record)
                }
                Stage::MinhashDedup => {
                    let before = docs;
                    let (kept, records, outcomes) = lsh_dedup(before.clone(), &config);
                    dedup_records = records;
                    outcome_stage(*stage, before, kept, outcomes)
                }
            };
            docs = kept;
            all_drops.extend(drops);
            report.stages.push(record);
        }

        report.sources_in = sources_in;
        report.sources_out = source_distribution(&docs);
        Ok(FunnelOutput { docs, report, dedup_records, drops: all_drops })
    }
}

/// Input and output locations for a file-level run.
#[derive(Debug, Clone, Default)]
pub struct RunPaths {
    pub inputs: Vec<PathBuf>,
    /// Plain-text directories ingested as document-kind sources, with their
    /// source tag.
    pub text_dirs: Vec<(PathBuf, String)>,
    pub output: PathBuf,
    pub dedup_report: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub strict: bool,
    pub quiet: bool,
}

fn emit(quiet: bool, event: serde_json::Value) {
    if !quiet {
        eprintln!("{event}");
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn write_json_lines<T: Serialize>(items: &[T], path: &Path) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| PipelineError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })?;
        writer.write_all(line.as_bytes()).map_err(io_err(path))?;
        writer.write_all(b"\n").map_err(io_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

impl Pipeline<'_> {
    /// File-to-file run: ingest, funnel, and all reports. Outputs are
    /// written under a `.partial` suffix and renamed only after every write
    /// has succeeded, so an aborted run never leaves final-looking files.
    pub fn run(&self, paths: &RunPaths, options: &RunOptions) -> Result<FunnelReport, PipelineError> {
        let config = validate_config(self.config.clone())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.worker_count)
            .build()
            .map_err(|e| PipelineError::Pool(e.to_string()))?;

        emit(
            options.quiet,
            json!({"event": "run_start", "stages": self.plan.stages().iter().map(|s| s.name()).collect::<Vec<_>>(), "workers": config.worker_count, "seed": config.seed}),
        );

        // Ingest in input order; later duplicates of an id are skipped.
        let read_options = ReadOptions { strict: options.strict };
        let mut docs: Vec<Document> = Vec::new();
        let mut sidecar: Vec<SidecarEntry> = Vec::new();
        for input in &paths.inputs {
            let (d, s) = read_jsonl(input, read_options)?.collect_with_sidecar();
            docs.extend(d);
            sidecar.extend(s);
        }
        for (dir, source) in &paths.text_dirs {
            let (d, s) = read_text_dir(dir, source, read_options)?.collect_with_sidecar();
            docs.extend(d);
            sidecar.extend(s);
        }

        let mut seen: HashSet<String> = HashSet::with_capacity(docs.len());
        let mut unique: Vec<Document> = Vec::with_capacity(docs.len());
        for doc in docs {
            if seen.insert(doc.id.clone()) {
                unique.push(doc);
            } else if options.strict {
                return Err(PipelineError::DuplicateId { id: doc.id });
            } else {
                sidecar.push(SidecarEntry {
                    path: "<merged-inputs>".to_string(),
                    line: 0,
                    error: format!("duplicate document id {:?} skipped", doc.id),
                });
            }
        }
        emit(
            options.quiet,
            json!({"event": "ingest", "documents": unique.len(), "sidecar_entries": sidecar.len()}),
        );

        let output = pool.install(|| self.run_docs(unique))?;

        for drop in &output.drops {
            emit(options.quiet, serde_json::to_value(drop).expect("drop event serializes"));
        }
        for stage in &output.report.stages {
            emit(
                options.quiet,
                json!({"event": "stage", "stage": stage.stage, "docs_in": stage.docs_in, "docs_out": stage.docs_out, "records_out": stage.records_out, "words_in": stage.words_in, "words_out": stage.words_out}),
            );
        }

        // All writes go to .partial first; rename together at the end.
        let mut renames: Vec<(PathBuf, PathBuf)> = Vec::new();

        let corpus_partial = partial_path(&paths.output);
        write_jsonl(output.docs, &corpus_partial)?;
        renames.push((corpus_partial, paths.output.clone()));

        if let Some(path) = &paths.dedup_report {
            let partial = partial_path(path);
            write_json_lines(&output.dedup_records, &partial)?;
            renames.push((partial, path.clone()));
        }
        if let Some(path) = &paths.report_json {
            let partial = partial_path(path);
            let mut body = serde_json::to_string_pretty(&output.report).expect("report serializes");
            body.push('\n');
            std::fs::write(&partial, body).map_err(io_err(&partial))?;
            renames.push((partial, path.clone()));
        }
        let sidecar_path = paths.sidecar.clone().or_else(|| {
            if sidecar.is_empty() {
                None
            } else {
                Some(default_sidecar_path(&paths.output))
            }
        });
        if let Some(path) = sidecar_path {
            let partial = partial_path(&path);
            write_sidecar(&sidecar, &partial)?;
            renames.push((partial, path));
        }

        for (from, to) in renames {
            std::fs::rename(&from, &to).map_err(io_err(&to))?;
        }

        emit(options.quiet, json!({"event": "run_complete", "documents_out": output.report.stages.last().map(|s| s.records_out).unwrap_or(0)}));
        Ok(output.report)
    }
}

/// Where ingest errors land when no sidecar path was configured.
pub fn default_sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".errors.jsonl");
    output.with_file_name(name)
}
