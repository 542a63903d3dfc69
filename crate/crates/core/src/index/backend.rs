use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use async_trait::async_trait;
use futures::future::join_all;
use serde::{Deserialize, Serialize};

use super::document::SourceTag;
use super::inverted::InvertedIndex;
use super::ranked::RankedList;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    LocalIndex,
    StructuredRecords,
    Desktop,
    Remote,
}

#[async_trait]
pub trait SearchBackend: Send + Sync {
    async fn search(&self, query: &str, k: usize) -> Result<RankedList>;

    /// Reachability probe; local backends are always healthy.
    async fn check_health(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub kind: BackendKind,
    pub source: SourceTag,
    pub healthy: bool,
    /// Lower wins merge ties.
    pub priority: i32,
    /// Hidden unless the request carries the visibility token.
    #[serde(default)]
    pub private: bool,
    /// Per-backend local similarity threshold; 0 disables it.
    #[serde(default)]
    pub score_floor: f64,
}

impl BackendDescriptor {
    pub fn new(name: impl Into<String>, kind: BackendKind, source: SourceTag, priority: i32) -> Self {
        BackendDescriptor {
            name: name.into(),
            kind,
            source,
            healthy: true,
            priority,
            private: false,
            score_floor: 0.0,
        }
    }
}

pub struct RegisteredBackend {
    descriptor: BackendDescriptor,
    healthy: AtomicBool,
    backend: Arc<dyn SearchBackend>,
}

impl RegisteredBackend {
    pub fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            healthy: self.is_healthy(),
            ..self.descriptor.clone()
        }
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    pub fn is_healthy(&self) -> bool {
        self.healthy.load(Ordering::Relaxed)
    }

    pub fn backend(&self) -> &Arc<dyn SearchBackend> {
        &self.backend
    }
}

impl std::fmt::Debug for RegisteredBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegisteredBackend")
            .field("descriptor", &self.descriptor())
            .finish()
    }
}

#[derive(Debug, Default)]
pub struct BackendRegistry {
    entries: Vec<RegisteredBackend>,
}

impl BackendRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, descriptor: BackendDescriptor, backend: Arc<dyn SearchBackend>) -> Result<()> {
        if self.get(&descriptor.name).is_some() {
            return Err(Error::DuplicateBackend(descriptor.name));
        }
        self.entries.push(RegisteredBackend {
            healthy: AtomicBool::new(descriptor.healthy),
            descriptor,
            backend,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&RegisteredBackend> {
        self.entries.iter().find(|e| e.name() == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegisteredBackend> {
        self.entries.iter()
    }

    pub fn set_healthy(&self, name: &str, healthy: bool) -> bool {
        self.get(name)
            .map(|e| e.healthy.store(healthy, Ordering::Relaxed))
            .is_some()
    }

    /// Probes every backend and records the outcome.
    pub async fn refresh_health(&self) {
        let probes = join_all(self.entries.iter().map(|e| e.backend.check_health())).await;
        for (e, ok) in self.entries.iter().zip(probes) {
            e.healthy.store(ok, Ordering::Relaxed);
        }
    }
}

/// Healthy backends whose source the caller enabled. Private backends need
/// `allow_private`. Routing does not look at the query text.
pub fn select_backends<'r>(
    _query: &str,
    registry: &'r BackendRegistry,
    enabled: &BTreeSet<SourceTag>,
    allow_private: bool,
) -> Vec<&'r RegisteredBackend> {
    registry
        .iter()
        .filter(|e| e.is_healthy())
        .filter(|e| enabled.contains(&e.descriptor.source))
        .filter(|e| allow_private || !e.descriptor.private)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendResult {
    pub name: String,
    pub priority: i32,
    pub source: SourceTag,
    pub list: RankedList,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchOutcome {
    pub results: Vec<BackendResult>,
    pub all_failed: bool,
}

impl DispatchOutcome {
    pub fn failures(&self) -> impl Iterator<Item = (&str, &str)> {
        self.results
            .iter()
            .filter_map(|r| r.failure.as_deref().map(|f| (r.name.as_str(), f)))
    }
}

/// Queries every backend concurrently with the per-backend document cap.
/// A failing or slow backend contributes an empty, flagged list.
pub async fn dispatch(query: &str, backends: &[&RegisteredBackend], cap: usize, timeout: Duration) -> DispatchOutcome {
    let calls = backends.iter().map(|b| async move {
        let d = &b.descriptor;
        let outcome = tokio::time::timeout(timeout, b.backend.search(query, cap)).await;
        let (mut list, failure) = match outcome {
            Ok(Ok(list)) => (list, None),
            Ok(Err(e)) => (RankedList::new(query), Some(e.to_string())),
            Err(_) => (RankedList::new(query), Some(format!("timed out after {} ms", timeout.as_millis()))),
        };
        if let Some(f) = &failure {
            tracing::warn!(backend = %d.name, "search failed: {f}");
        }
        list.entries.retain(|e| e.score > 0.0 && e.score >= d.score_floor);
        list.entries.truncate(cap);
        for e in &mut list.entries {
            e.backend.clone_from(&d.name);
        }
        BackendResult {
            name: d.name.clone(),
            priority: d.priority,
            source: d.source,
            list,
            failure,
        }
    });
    let results = join_all(calls).await;
    let all_failed = results.iter().all(|r| r.failure.is_some());
    DispatchOutcome { results, all_failed }
}

/// Serves a committed index; `replace` swaps in a new snapshot atomically.
#[derive(Debug)]
pub struct LocalIndexBackend {
    index: RwLock<Arc<InvertedIndex>>,
}

impl LocalIndexBackend {
    pub fn new(index: InvertedIndex) -> Self {
        LocalIndexBackend {
            index: RwLock::new(Arc::new(index)),
        }
    }

    pub fn snapshot(&self) -> Arc<InvertedIndex> {
        Arc::clone(&self.index.read().expect("index lock"))
    }

    pub fn replace(&self, index: InvertedIndex) {
        *self.index.write().expect("index lock") = Arc::new(index);
    }
}

#[async_trait]
impl SearchBackend for LocalIndexBackend {
    async fn search(&self, query: &str, k: usize) -> Result<RankedList> {
        Ok(self.snapshot().search(query, k))
    }
}
