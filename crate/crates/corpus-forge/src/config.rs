//! Declarative TOML configuration: `[quality]`, `[langid]`, `[dedup]`,
//! `[chunk]`, and `[pii]` sections over the built-in defaults. Precedence is
//! CLI flags over file values over defaults; the merge here covers the file
//! layer, flag overrides happen in the CLI.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::model::PipelineConfig;
use crate::pii::{PiiError, PiiRule, PiiRuleSet};

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("[pii] section: {0}")]
    Pii(#[from] PiiError),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub worker_count: Option<usize>,
    #[serde(default)]
    pub quality: QualitySection,
    #[serde(default)]
    pub langid: LangIdSection,
    #[serde(default)]
    pub dedup: DedupSection,
    #[serde(default)]
    pub chunk: ChunkSection,
    #[serde(default)]
    pub pii: PiiSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualitySection {
    pub min_line_words: Option<usize>,
    pub bullet_ratio_max: Option<f64>,
    pub ellipsis_ratio_max: Option<f64>,
    pub duplicate_line_fraction_max: Option<f64>,
    pub top_two_gram_fraction_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangIdSection {
    pub threshold: Option<f64>,
    pub target_language: Option<String>,
    /// Path to a trained profile model; the bundled classifier otherwise.
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DedupSection {
    pub minhash_permutations: Option<usize>,
    pub lsh_bands: Option<usize>,
    pub lsh_rows: Option<usize>,
    pub shingle_size: Option<usize>,
    pub min_sentence_chars: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkSection {
    pub max_words: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiiSection {
    pub rules: Option<Vec<PiiRule>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigFileError::Read { path: path.to_path_buf(), source })?;
        toml::from_str(&text)
            .map_err(|source| ConfigFileError::Parse { path: path.to_path_buf(), source })
    }

    /// File values layered over `base` (normally the defaults).
    pub fn apply(&self, base: PipelineConfig) -> PipelineConfig {
        let q = &self.quality;
        let l = &self.langid;
        let d = &self.dedup;
        PipelineConfig {
            seed: self.seed.unwrap_or(base.seed),
            worker_count: self.worker_count.unwrap_or(base.worker_count),
            min_line_words: q.min_line_words.unwrap_or(base.min_line_words),
            bullet_ratio_max: q.bullet_ratio_max.unwrap_or(base.bullet_ratio_max),
            ellipsis_ratio_max: q.ellipsis_ratio_max.unwrap_or(base.ellipsis_ratio_max),
            duplicate_line_fraction_max: q
                .duplicate_line_fraction_max
                .or(base.duplicate_line_fraction_max),
            top_two_gram_fraction_max: q
                .top_two_gram_fraction_max
                .or(base.top_two_gram_fraction_max),
            langid_threshold: l.threshold.unwrap_or(base.langid_threshold),
            target_language: l.target_language.clone().unwrap_or(base.target_language),
            minhash_permutations: d.minhash_permutations.unwrap_or(base.minhash_permutations),
            lsh_bands: d.lsh_bands.unwrap_or(base.lsh_bands),
            lsh_rows: d.lsh_rows.unwrap_or(base.lsh_rows),
            shingle_size: d.shingle_size.unwrap_or(base.shingle_size),
            min_sentence_chars: d.min_sentence_chars.unwrap_or(base.min_sentence_chars),
            chunk_max_words: self.chunk.max_words.unwrap_or(base.chunk_max_words),
        }
    }

    pub fn pii_rules(&self) -> Result<PiiRuleSet, ConfigFileError> {
        match &self.pii.rules {
            Some(rules) => Ok(PiiRuleSet::new(rules.clone())?),
            None => Ok(PiiRuleSet::default()),
        }
    }

    pub fn langid_model(&self) -> Option<&Path> {
        self.langid.model.as_deref()
    }
}
