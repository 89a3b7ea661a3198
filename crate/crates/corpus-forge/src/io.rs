//! Reading and writing corpus streams in stable on-disk formats.
//!
//! The interchange format is JSONL, one document per line:
//! `{"id": str, "source": str, "source_kind": str, "text": str, "meta": object}`
//! (`lang_confidence` appears when set). Malformed input is recorded in an
//! error sidecar (`{"path", "line", "error"}` JSONL) and skipped unless
//! strict mode is on. Output files are sorted by ascending document id so
//! repeated runs produce byte-identical bytes regardless of worker count.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_text, Document, SourceKind};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One skipped-input record in the error sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub path: String,
    /// 1-based line number; 0 for whole-file errors.
    pub line: u64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Abort on the first malformed record instead of skipping it.
    pub strict: bool,
}

/// An ordered, lazily produced sequence of documents.
///
/// Iteration order is deterministic given identical inputs. Records that
/// fail to parse are pushed to the shared sidecar as iteration passes them.
pub struct CorpusStream {
    iter: Box<dyn Iterator<Item = Document> + Send>,
    origin: Vec<PathBuf>,
    format: &'static str,
    sidecar: Arc<Mutex<Vec<SidecarEntry>>>,
}

impl std::fmt::Debug for CorpusStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusStream")
            .field("origin", &self.origin)
            .field("format", &self.format)
            .finish_non_exhaustive()
    }
}

impl Iterator for CorpusStream {
    type Item = Document;

    fn next(&mut self) -> Option<Document> {
        self.iter.next()
    }
}

impl CorpusStream {
    pub fn from_docs(docs: Vec<Document>) -> Self {
        CorpusStream {
            iter: Box::new(docs.into_iter()),
            origin: Vec::new(),
            format: "memory",
            sidecar: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn origin(&self) -> &[PathBuf] {
        &self.origin
    }

    pub fn format(&self) -> &str {
        self.format
    }

    /// Handle to the sidecar entries accumulated so far; complete only after
    /// the stream has been fully consumed.
    pub fn sidecar_handle(&self) -> Arc<Mutex<Vec<SidecarEntry>>> {
        Arc::clone(&self.sidecar)
    }

    /// Consumes the stream, returning all documents plus the sidecar entries.
    pub fn collect_with_sidecar(mut self) -> (Vec<Document>, Vec<SidecarEntry>) {
        let docs: Vec<Document> = self.iter.by_ref().collect();
        let sidecar = std::mem::take(&mut *self.sidecar.lock().unwrap());
        (docs, sidecar)
    }
}

/// Lenient deserialization target; field-level validation happens after parse.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    source: Option<String>,
    source_kind: Option<SourceKind>,
    text: Option<String>,
    lang_confidence: Option<f64>,
    meta: Option<BTreeMap<String, serde_json::Value>>,
}

fn parse_record(line: &str, path: &Path, line_no: u64) -> Result<Document, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let text = raw.text.ok_or_else(|| "missing required field: text".to_string())?;
    if let Some(conf) = raw.lang_confidence {
        if !(0.0..=1.0).contains(&conf) {
            return Err(format!("lang_confidence out of [0,1]: {conf}"));
        }
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let id = match raw.id {
        Some(id) if !id.is_empty() => id,
        _ => format!("{file_name}:{line_no}"),
    };
    Ok(Document {
        id,
        source: raw.source.unwrap_or_else(|| "unknown".to_string()),
        source_kind: raw.source_kind.unwrap_or_default(),
        text: normalize_text(&text),
        lang_confidence: raw.lang_confidence,
        meta: raw.meta.unwrap_or_default(),
    })
}

/// Reads a JSONL corpus file. Documents are yielded in file order; records
/// without an id get `"<filename>:<line-number>"`. Blank lines are ignored.
pub fn read_jsonl(path: &Path, options: ReadOptions) -> Result<CorpusStream, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let sidecar = Arc::new(Mutex::new(Vec::new()));
    let path_buf = path.to_path_buf();

    if options.strict {
        let mut docs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = line.map_err(|source| IngestError::Io {
                path: path_buf.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            docs.push(parse_record(&line, &path_buf, line_no).map_err(|message| {
                IngestError::Malformed { path: path_buf.clone(), line: line_no, message }
            })?);
        }
        let mut stream = CorpusStream::from_docs(docs);
        stream.origin = vec![path_buf];
        stream.format = "jsonl";
        return Ok(stream);
    }

    let sidecar_for_iter = Arc::clone(&sidecar);
    let iter_path = path_buf.clone();
    let iter = reader.lines().enumerate().filter_map(move |(idx, line)| {
        let line_no = idx as u64 + 1;
        let record_err = |error: String| SidecarEntry {
            path: iter_path.display().to_string(),
            line: line_no,
            error,
        };
        match line {
            Ok(line) => {
                if line.trim().is_empty() {
                    return None;
                }
                match parse_record(&line, &iter_path, line_no) {
                    Ok(doc) => Some(doc),
                    Err(message) => {
                        sidecar_for_iter.lock().unwrap().push(record_err(message));
                        None
                    }
                }
            }
            Err(e) => {
                sidecar_for_iter.lock().unwrap().push(record_err(e.to_string()));
                None
            }
        }
    });

    Ok(CorpusStream {
        iter: Box::new(iter),
        origin: vec![path_buf],
        format: "jsonl",
        sidecar,
    })
}

/// Reads a directory of plain-text files as one document per file
/// (`source_kind = document`). Files are visited in name order.
pub fn read_text_dir(
    dir: &Path,
    source: &str,
    options: ReadOptions,
) -> Result<CorpusStream, IngestError> {
    let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Open {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let sidecar = Arc::new(Mutex::new(Vec::new()));
    let source = source.to_string();

    let read_one = {
        let source = source.clone();
        move |path: &Path| -> Result<Document, String> {
            let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
            let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
            let id = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok(Document::new(id, source.clone(), SourceKind::Document, &text))
        }
    };

    if options.strict {
        let mut docs = Vec::new();
        for file in &files {
            docs.push(read_one(file).map_err(|message| IngestError::Malformed {
                path: file.clone(),
                line: 0,
                message,
            })?);
        }
        let mut stream = CorpusStream::from_docs(docs);
        stream.origin = vec![dir.to_path_buf()];
        stream.format = "text-dir";
        return Ok(stream);
    }

    let sidecar_for_iter = Arc::clone(&sidecar);
    let iter = files.into_iter().filter_map(move |file| match read_one(&file) {
        Ok(doc) => Some(doc),
        Err(error) => {
            sidecar_for_iter.lock().unwrap().push(SidecarEntry {
                path: file.display().to_string(),
                line: 0,
                error,
            });
            None
        }
    });

    Ok(CorpusStream {
        iter: Box::new(iter),
        origin: vec![dir.to_path_buf()],
        format: "text-dir",
        sidecar,
    })
}

/// Writes documents as JSONL sorted by ascending id, returning the count.
///
/// Sorting is what makes output byte-identical across runs and worker
/// counts; callers must not rely on arrival order being preserved.
pub fn write_jsonl<I>(docs: I, path: &Path) -> Result<u64, IngestError>
where
    I: IntoIterator<Item = Document>,
{
    let mut docs: Vec<Document> = docs.into_iter().collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    let io_err = |source: std::io::Error| IngestError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    let mut count = 0u64;
    for doc in &docs {
        let line = serde_json::to_string(doc)
            .map_err(|e| io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
        count += 1;
    }
    writer.flush().map_err(io_err)?;
    Ok(count)
}

/// Writes sidecar entries as JSONL.
pub fn write_sidecar(entries: &[SidecarEntry], path: &Path) -> Result<(), IngestError> {
    let io_err = |source: std::io::Error| IngestError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    for entry in entries {
        let line = serde_json::to_string(entry)
            .map_err(|e| io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}
