use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::index::SourceTag;

/// One result as returned to clients. Field order is part of the wire
/// format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub url: String,
    pub title: String,
    pub snippet: String,
    pub score: f64,
    pub category: String,
    pub secondary: Option<String>,
    pub cluster: Option<String>,
    pub source: SourceTag,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendFailure {
    pub backend: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseFlags {
    pub dispatched: Vec<String>,
    pub backend_failures: Vec<BackendFailure>,
    pub all_failed: bool,
    pub no_expansion: bool,
    pub expanded_with: Vec<String>,
    pub unconverged: bool,
    pub flagged_seeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    /// The query as submitted.
    pub query: String,
    /// The query sent to backends, after expansion.
    pub executed: String,
    pub entries: Vec<SearchEntry>,
    /// Primary category to entry count.
    pub facets: BTreeMap<String, usize>,
    pub clusters: Vec<ClusterSummary>,
    pub flags: ResponseFlags,
    pub warnings: Vec<String>,
}

impl SearchResponse {
    pub fn empty(query: &str, executed: &str, flags: ResponseFlags) -> Self {
        SearchResponse {
            query: query.to_string(),
            executed: executed.to_string(),
            entries: Vec::new(),
            facets: BTreeMap::new(),
            clusters: Vec::new(),
            flags,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("response serializes")
    }
}
