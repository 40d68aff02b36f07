//! Corpus ingestion: a directory with one document per file, or a JSON-lines
//! file with one `{"id": ..., "text": ...}` record per line.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::index::{IndexBuilder, IndexError, InvertedIndex};
use crate::tokenize::TokenPolicy;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Document {
        path: PathBuf,
        #[source]
        source: IndexError,
    },
    #[error("{path}, line {line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    #[allow(dead_code)]
    id: String,
    text: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Regular files directly inside `dir`, sorted by file name bytes.
pub fn directory_documents(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if fs::metadata(&path).map_err(io_err(&path))?.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub fn ingest_directory(builder: &mut IndexBuilder, dir: &Path) -> Result<(), CorpusError> {
    for path in directory_documents(dir)? {
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        builder
            .add_document_bytes(&bytes)
            .map_err(|source| CorpusError::Document {
                path: path.clone(),
                source,
            })?;
    }
    Ok(())
}

/// Blank lines are skipped; every other line must be a record.
pub fn ingest_jsonl(builder: &mut IndexBuilder, path: &Path) -> Result<(), CorpusError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    for (n, line) in BufReader::new(file).split(b'\n').enumerate() {
        let line = line.map_err(io_err(path))?;
        let record_err = |message: String| CorpusError::Record {
            path: path.to_owned(),
            line: n + 1,
            message,
        };
        let text = std::str::from_utf8(&line).map_err(|e| record_err(e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(text).map_err(|e| record_err(e.to_string()))?;
        builder
            .add_document(&rec.text)
            .map_err(|e| record_err(e.to_string()))?;
    }
    Ok(())
}

/// Builds an index from a directory or a JSON-lines file.
pub fn build_index(path: &Path, policy: TokenPolicy) -> Result<InvertedIndex, CorpusError> {
    let meta = fs::metadata(path).map_err(io_err(path))?;
    let mut builder = IndexBuilder::new(policy);
    if meta.is_dir() {
        ingest_directory(&mut builder, path)?;
    } else {
        ingest_jsonl(&mut builder, path)?;
    }
    Ok(builder.finish())
}
