//! Structured-records backend over a tab-separated table with a header row.

use std::path::{Path, PathBuf};

use async_trait::async_trait;

use super::backend::SearchBackend;
use super::document::{Document, SourceTag};
use super::inverted::{index_documents, InvertedIndex};
use super::ranked::RankedList;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub row: usize,
    pub fields: Vec<String>,
}

#[derive(Debug)]
pub struct RecordsStore {
    name: String,
    columns: Vec<String>,
    records: Vec<Record>,
    index: InvertedIndex,
}

impl RecordsStore {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(Error::parse(name, 1, "missing header row"));
        };
        let columns: Vec<String> = header.split('\t').map(|c| c.trim().to_string()).collect();
        let mut records = Vec::new();
        for (line_no, line) in lines {
            let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_string()).collect();
            if fields.len() != columns.len() {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!("expected {} fields, found {}", columns.len(), fields.len()),
                ));
            }
            records.push(Record {
                row: records.len() + 1,
                fields,
            });
        }
        let docs = records.iter().map(|r| record_document(name, r));
        let index = index_documents(docs)?;
        Ok(RecordsStore {
            name: name.to_string(),
            columns,
            records,
            index,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingStore(path.to_path_buf()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "records".into());
        Self::parse(&name, &text)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// The first field becomes the title, the rest the body, so the indexed
/// text is the whole row.
fn record_document(store: &str, r: &Record) -> Document {
    Document::new(
        format!("{store}:{:06}", r.row),
        format!("record://{store}/{}", r.row),
        r.fields.first().cloned().unwrap_or_default(),
        r.fields.iter().skip(1).map(String::as_str).collect::<Vec<_>>().join(" "),
        SourceTag::StructuredRecords,
    )
}

/// Rows ranked by cosine similarity of their text to the query. A missing
/// store gives an empty, flagged list.
pub fn query_structured_records(query: &str, store: Option<&RecordsStore>, k: usize) -> RankedList {
    match store {
        Some(s) => s.index.search(query, k),
        None => {
            let mut l = RankedList::new(query);
            l.warnings.push("structured-records store missing".into());
            l
        }
    }
}

#[derive(Debug)]
pub struct RecordsBackend {
    path: PathBuf,
    store: Option<RecordsStore>,
}

impl RecordsBackend {
    /// Never fails; a missing or broken file surfaces on every search.
    pub fn open(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let store = RecordsStore::load(&path).ok();
        RecordsBackend { path, store }
    }

    pub fn from_store(store: RecordsStore) -> Self {
        RecordsBackend {
            path: PathBuf::from(store.name()),
            store: Some(store),
        }
    }
}

#[async_trait]
impl SearchBackend for RecordsBackend {
    async fn search(&self, query: &str, k: usize) -> Result<RankedList> {
        match &self.store {
            Some(s) => Ok(query_structured_records(query, Some(s), k)),
            None => Err(Error::MissingStore(self.path.clone())),
        }
    }
}
