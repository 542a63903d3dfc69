//! Append-only page stores.
//!
//! One JSON object per line, fields in this order:
//! `url`, `status`, `fetched_at` (RFC 3339), `title`, `text`, `outlinks`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::fetch::FetchResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub url: String,
    pub status: u16,
    pub fetched_at: DateTime<Utc>,
    pub title: String,
    pub text: String,
    pub outlinks: Vec<String>,
}

impl From<&FetchResult> for PageRecord {
    fn from(r: &FetchResult) -> Self {
        PageRecord {
            url: r.url.clone(),
            status: r.status,
            fetched_at: r.fetched_at,
            title: r.title.clone(),
            text: r.text.clone(),
            outlinks: r.outlinks.clone(),
        }
    }
}

pub trait PageSink {
    fn append(&mut self, record: &PageRecord) -> Result<()>;
}

#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl RecordStore {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(RecordStore {
            path,
            writer: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl PageSink for RecordStore {
    fn append(&mut self, record: &PageRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.writer, "{line}")
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// In-memory sink, mostly for tests.
impl PageSink for Vec<PageRecord> {
    fn append(&mut self, record: &PageRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

pub fn read_records(path: &Path) -> Result<Vec<PageRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path.display().to_string(), i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}
