use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::document::{Document, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub doc: Document,
    pub score: f64,
    pub source: SourceTag,
    /// Name of the backend that produced the entry.
    pub backend: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query: String,
    pub entries: Vec<RankedEntry>,
    pub warnings: Vec<String>,
}

/// Score descending, then document id ascending.
pub fn standard_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.doc.id.cmp(&b.doc.id))
}

impl RankedList {
    pub fn new(query: impl Into<String>) -> Self {
        RankedList {
            query: query.into(),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sort_standard(&mut self) {
        self.entries.sort_by(standard_order);
    }

    pub fn is_standard_sorted(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| standard_order(&w[0], &w[1]) == Ordering::Less)
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    pub fn urls(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc.url.as_str())
    }
}
