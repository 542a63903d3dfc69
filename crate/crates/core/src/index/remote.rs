//! Federated backend: another instance's `GET /search?q=&k=` endpoint.

use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;

use super::backend::SearchBackend;
use super::document::{Document, SourceTag};
use super::ranked::{RankedEntry, RankedList};
use crate::error::{Error, Result};

/// The subset of a search response body this backend reads.
#[derive(Debug, Deserialize)]
struct WireResponse {
    #[serde(default)]
    entries: Vec<WireEntry>,
}

#[derive(Debug, Deserialize)]
struct WireEntry {
    url: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    snippet: String,
    score: f64,
}

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    name: String,
    base: String,
    client: reqwest::Client,
}

impl RemoteBackend {
    pub fn new(name: impl Into<String>, base_url: &str, timeout: Duration) -> Result<Self> {
        let client = reqwest::Client::builder().timeout(timeout).build()?;
        Ok(RemoteBackend {
            name: name.into(),
            base: base_url.trim_end_matches('/').to_string(),
            client,
        })
    }

    fn fail(&self, message: impl ToString) -> Error {
        Error::Backend {
            name: self.name.clone(),
            message: message.to_string(),
        }
    }
}

#[async_trait]
impl SearchBackend for RemoteBackend {
    async fn search(&self, query: &str, k: usize) -> Result<RankedList> {
        let resp = self
            .client
            .get(format!("{}/search", self.base))
            .query(&[("q", query), ("k", &k.to_string())])
            .send()
            .await
            .map_err(|e| self.fail(e))?;
        if !resp.status().is_success() {
            return Err(self.fail(format!("status {}", resp.status())));
        }
        let body: WireResponse = resp.json().await.map_err(|e| self.fail(e))?;
        let mut list = RankedList::new(query);
        for e in body.entries {
            list.entries.push(RankedEntry {
                doc: Document::new(e.url.clone(), e.url, e.title, e.snippet, SourceTag::Remote),
                score: e.score,
                source: SourceTag::Remote,
                backend: self.name.clone(),
            });
        }
        list.sort_standard();
        list.truncate(k);
        Ok(list)
    }

    async fn check_health(&self) -> bool {
        match self.client.get(format!("{}/health", self.base)).send().await {
            Ok(r) => r.status().is_success(),
            Err(_) => false,
        }
    }
}
