//! Thin command-line front end; all behavior lives in the library.
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use corpus_forge::config::FileConfig;
use corpus_forge::io::{read_jsonl, ReadOptions};
use corpus_forge::langid::{default_classifier, LanguageClassifier, NgramClassifier};
use corpus_forge::mcq::{
    translate_item, CommandTranslator, IdentityTranslator, McqItem, Translator,
    DEFAULT_PLACEHOLDER,
};
use corpus_forge::model::PipelineConfig;
use corpus_forge::pipeline::{Pipeline, RunOptions, RunPaths, StagePlan};
use corpus_forge::report::{render_table, source_distribution, FunnelReport, TableFormat};
use corpus_forge::sft::{
    apply_cutoff, format_chat, length_profile, record_tokens, sample_mix, validate_record,
    MixOptions, RatioBasis, SftRecord, WhitespaceEstimator, DEFAULT_SYSTEM_PROMPT,
};

#[derive(Parser)]
#[command(name = "corpus-forge", version, about = "Deterministic corpus curation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the filtering funnel over JSONL corpora and/or text directories.
    Filter(Box<FilterArgs>),
    /// Source-distribution report for an existing corpus, no filtering.
    Stats(StatsArgs),
    /// Assemble the instruction-tuning mix with weighted sampling.
    AssembleSft(AssembleSftArgs),
    /// Template-translate multiple-choice benchmark items.
    TemplateMcq(TemplateMcqArgs),
    /// Train a character n-gram language-ID profile model.
    TrainLangid(TrainLangidArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; flags override file values, file overrides defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; the CORPUS_FORGE_WORKERS env var overrides the
    /// config file, this flag overrides both.
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<(PipelineConfig, FileConfig)> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut config = file.apply(PipelineConfig::default());
        if let Ok(value) = std::env::var("CORPUS_FORGE_WORKERS") {
            config.worker_count = value
                .parse()
                .with_context(|| format!("CORPUS_FORGE_WORKERS={value:?} is not a count"))?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(workers) = self.workers {
            config.worker_count = workers;
        }
        Ok((config, file))
    }
}

#[derive(Args)]
struct FilterArgs {
    /// Input JSONL corpus file(s).
    #[arg(long = "input", required_unless_present = "text_dir")]
    inputs: Vec<PathBuf>,
    /// Directory of plain-text files ingested as document-kind records.
    #[arg(long = "text-dir")]
    text_dir: Vec<PathBuf>,
    /// Source tag for --text-dir records.
    #[arg(long, default_value = "documents")]
    text_source: String,
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated stage subset, e.g. "pii,c4".
    #[arg(long)]
    stages: Option<String>,
    /// Permit a stage order different from the default.
    #[arg(long)]
    allow_reorder: bool,
    /// Abort on malformed input instead of sidecar-and-skip.
    #[arg(long)]
    strict: bool,
    /// Suppress per-event JSON logs on stderr.
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    shingle_size: Option<usize>,
    #[arg(long)]
    langid_threshold: Option<f64>,
    #[arg(long)]
    target_language: Option<String>,
    /// Trained profile model file; bundled mk/en profiles otherwise.
    #[arg(long)]
    langid_model: Option<PathBuf>,
    /// Write the funnel report as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Render the report to stdout: markdown, json, or csv.
    #[arg(long)]
    report_format: Option<String>,
    /// Near-duplicate report JSONL ({"dropped_id","kept_id","estimated_similarity"}).
    #[arg(long)]
    dedup_report: Option<PathBuf>,
    /// Error sidecar path; defaults to <output>.errors.jsonl when needed.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// Write the report as JSON here instead of only rendering.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    report_format: String,
}

#[derive(Args)]
struct AssembleSftArgs {
    /// Instruction record JSONL file(s); pool membership comes from each
    /// record's "favored" flag.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    /// favored:translated sampling ratio.
    #[arg(long, default_value = "2:1")]
    ratio: String,
    #[arg(long, default_value_t = 4096)]
    max_tokens: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Records to draw; 0 means one draw per input record.
    #[arg(long, default_value_t = 0)]
    target: usize,
    /// Account the ratio in words instead of records.
    #[arg(long)]
    by_words: bool,
    /// System prompt file; the bundled Macedonian prompt otherwise.
    #[arg(long)]
    system_prompt: Option<PathBuf>,
    /// Also write formatted training strings ({"id","text"} JSONL).
    #[arg(long)]
    chat_output: Option<PathBuf>,
}

#[derive(Args)]
struct TemplateMcqArgs {
    /// Items JSONL: {"id","stem","choices","answer_index"}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// "identity" or "command" (requires --translator-cmd).
    #[arg(long, default_value = "identity")]
    translator: String,
    /// External command invoked per text: stdin in, stdout out.
    #[arg(long)]
    translator_cmd: Option<String>,
    #[arg(long, default_value = DEFAULT_PLACEHOLDER)]
    placeholder: String,
    /// Review queue for items whose placeholder was lost in translation.
    #[arg(long)]
    review: Option<PathBuf>,
}

#[derive(Args)]
struct TrainLangidArgs {
    /// Training samples JSONL: {"text","lang"}.
    #[arg(long)]
    input: PathBuf,
    /// Output model file.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Filter(args) => run_filter(*args),
        Command::Stats(args) => run_stats(args),
        Command::AssembleSft(args) => run_assemble_sft(args),
        Command::TemplateMcq(args) => run_template_mcq(args),
        Command::TrainLangid(args) => run_train_langid(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_filter(args: FilterArgs) -> Result<()> {
    let (mut config, file) = args.config.resolve()?;
    if let Some(v) = args.permutations {
        config.minhash_permutations = v;
    }
    if let Some(v) = args.bands {
        config.lsh_bands = v;
    }
    if let Some(v) = args.rows {
        config.lsh_rows = v;
    }
    if let Some(v) = args.shingle_size {
        config.shingle_size = v;
    }
    if let Some(v) = args.langid_threshold {
        config.langid_threshold = v;
    }
    if let Some(v) = args.target_language {
        config.target_language = v;
    }

    let plan = match &args.stages {
        Some(names) => StagePlan::from_names(names, args.allow_reorder)?,
        None => StagePlan::default(),
    };

    let loaded_model;
    let classifier: &dyn LanguageClassifier =
        match args.langid_model.as_deref().or(file.langid_model()) {
            Some(path) => {
                loaded_model = NgramClassifier::load(path)?;
                &loaded_model
            }
            None => default_classifier(),
        };

    let pii_rules = file.pii_rules()?;
    let pipeline = Pipeline { plan: &plan, config: &config, pii_rules: &pii_rules, classifier };
    let paths = RunPaths {
        inputs: args.inputs,
        text_dirs: args.text_dir.into_iter().map(|d| (d, args.text_source.clone())).collect(),
        output: args.output,
        dedup_report: args.dedup_report,
        report_json: args.report,
        sidecar: args.sidecar,
    };
    let report =
        pipeline.run(&paths, &RunOptions { strict: args.strict, quiet: args.quiet })?;

    if let Some(format) = args.report_format {
        let format: TableFormat = format.parse()?;
        print!("{}", render_table(&report, format));
    }
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let mut docs = Vec::new();
    for input in &args.inputs {
        let (d, sidecar) = read_jsonl(input, ReadOptions::default())?.collect_with_sidecar();
        docs.extend(d);
        for entry in sidecar {
            eprintln!("warning: {}:{}: {}", entry.path, entry.line, entry.error);
        }
    }
    let distribution = source_distribution(&docs);
    let report = FunnelReport {
        stages: Vec::new(),
        sources_in: distribution.clone(),
        sources_out: distribution,
    };
    if let Some(path) = &args.report {
        let mut body = serde_json::to_string_pretty(&report)?;
        body.push('\n');
        std::fs::write(path, body)?;
    }
    let format: TableFormat = args.report_format.parse()?;
    print!("{}", render_table(&report, format));
    Ok(())
}

fn parse_ratio(text: &str) -> Result<(u32, u32)> {
    let (a, b) = text
        .split_once(':')
        .with_context(|| format!("ratio {text:?} must look like 2:1"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn read_sft_records(paths: &[PathBuf]) -> Result<Vec<Vec<SftRecord>>> {
    let mut sources = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut records = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: SftRecord = serde_json::from_str(line)
                .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
            validate_record(&record)
                .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
            records.push(record);
        }
        sources.push(records);
    }
    Ok(sources)
}

fn run_assemble_sft(args: AssembleSftArgs) -> Result<()> {
    let sources = read_sft_records(&args.inputs)?;
    let total_in: usize = sources.iter().map(Vec::len).sum();
    if total_in == 0 {
        bail!("no input records");
    }
    let options = MixOptions {
        ratio: parse_ratio(&args.ratio)?,
        seed: args.seed,
        target_count: if args.target == 0 { total_in } else { args.target },
        basis: if args.by_words { RatioBasis::Words } else { RatioBasis::Records },
    };
    let (mix, stats) = sample_mix(&sources, &options)?;

    let counter = WhitespaceEstimator;
    let profile = length_profile(&mix, &counter, args.max_tokens)?;

    let system_prompt = match &args.system_prompt {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?,
        None => DEFAULT_SYSTEM_PROMPT.to_string(),
    };

    let mut kept = Vec::with_capacity(mix.len());
    let mut truncated = 0usize;
    let mut dropped = 0usize;
    for mut record in mix {
        record.token_estimate = record_tokens(&record, &counter);
        match apply_cutoff(record, args.max_tokens, &counter) {
            (Some(record), outcome) => {
                if outcome.is_transformed() {
                    truncated += 1;
                }
                kept.push(record);
            }
            (None, _) => dropped += 1,
        }
    }

    use std::io::Write as _;
    let file = std::fs::File::create(&args.output)
        .with_context(|| format!("cannot write {}", args.output.display()))?;
    let mut writer = std::io::BufWriter::new(file);
    for (seq, record) in kept.iter().enumerate() {
        let mut named = record.clone();
        named.id = format!("{:06}-{}", seq, record.id);
        writeln!(writer, "{}", serde_json::to_string(&named)?)?;
    }
    writer.flush()?;

    if let Some(path) = &args.chat_output {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        for (seq, record) in kept.iter().enumerate() {
            let text = format_chat(record, &system_prompt)?;
            let line =
                serde_json::json!({"id": format!("{:06}-{}", seq, record.id), "text": text});
            writeln!(writer, "{line}")?;
        }
        writer.flush()?;
    }

    eprintln!(
        "{}",
        serde_json::json!({
            "event": "assemble_sft",
            "records_out": kept.len(),
            "favored_drawn": stats.favored_drawn,
            "translated_drawn": stats.translated_drawn,
            "favored_recycled": stats.favored_recycled,
            "translated_recycled": stats.translated_recycled,
            "truncated": truncated,
            "dropped_oversized": dropped,
            "coverage_at_max_tokens": profile.coverage_at_cutoff,
        })
    );
    Ok(())
}

fn run_template_mcq(args: TemplateMcqArgs) -> Result<()> {
    let command_translator;
    let translator: &dyn Translator = match args.translator.as_str() {
        "identity" => &IdentityTranslator,
        "command" => {
            let cmd = args
                .translator_cmd
                .as_ref()
                .context("--translator command requires --translator-cmd")?;
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let program = parts.next().context("empty --translator-cmd")?;
            command_translator = CommandTranslator { program, args: parts.collect() };
            &command_translator
        }
        other => bail!("unknown translator {other:?}; expected identity or command"),
    };

    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let mut out_items = Vec::new();
    let mut review = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: McqItem = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", args.input.display(), idx + 1))?;
        if let Some(item) = translate_item(&item, &args.placeholder, translator, &mut review)? {
            out_items.push(item);
        }
    }

    use std::io::Write as _;
    let file = std::fs::File::create(&args.output)?;
    let mut writer = std::io::BufWriter::new(file);
    for item in &out_items {
        writeln!(writer, "{}", serde_json::to_string(item)?)?;
    }
    writer.flush()?;

    if let Some(path) = &args.review {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        for entry in &review {
            writeln!(writer, "{}", serde_json::to_string(entry)?)?;
        }
        writer.flush()?;
    } else if !review.is_empty() {
        eprintln!(
            "warning: {} item(s) lost their placeholder; pass --review PATH to capture them",
            review.len()
        );
    }

    eprintln!(
        "{}",
        serde_json::json!({"event": "template_mcq", "translated": out_items.len(), "review_queue": review.len()})
    );
    Ok(())
}

fn run_train_langid(args: TrainLangidArgs) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct Sample {
        text: String,
        lang: String,
    }
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let sample: Sample = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", args.input.display(), idx + 1))?;
        samples.push(sample);
    }
    let borrowed: Vec<(&str, &str)> =
        samples.iter().map(|s| (s.text.as_str(), s.lang.as_str())).collect();
    let classifier =
        corpus_forge::langid::train_ngram_profiles(&borrowed, args.n_min..=args.n_max)?;
    classifier.save(&args.output)?;
    eprintln!(
        "{}",
        serde_json::json!({"event": "train_langid", "languages": classifier.languages(), "model": args.output.display().to_string()})
    );
    Ok(())
}
