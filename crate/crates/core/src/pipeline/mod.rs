//! End-to-end search: expansion, dispatch and merge, categorization,
//! filtering, clustering and profile re-ranking.

mod config;
mod response;

pub use config::{PipelineConfig, RemoteConfig, CONFIG_ENV};
pub use response::{BackendFailure, ClusterSummary, ResponseFlags, SearchEntry, SearchResponse};

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::categorize::{cluster_results, filter_by_categories, CategoryAssignment, Classifier, ClusterOutcome};
use crate::crawler::{read_records, PageRecord};
use crate::error::{Error, Result};
use crate::index::{
    dispatch, merge_results, select_backends, BackendDescriptor, BackendKind, BackendRegistry, DesktopBackend,
    Document, IndexWriter, InvertedIndex, LocalIndexBackend, RankedList, RecordsBackend, RemoteBackend, SourceTag,
};
use crate::personalization::{
    expand_query, record_visit, rerank_by_profile, ProfileStore, TermCategoryStats, UserProfile, VisitOutcome,
};
use crate::taxonomy::{path_depth, Taxonomy};
use crate::text::Tokenizer;

const RESULT_CACHE: usize = 4096;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchRequest {
    pub query: String,
    pub user: Option<String>,
    pub categories: Vec<String>,
    /// Restricts dispatch to these sources; `None` uses the configured set.
    pub sources: Option<BTreeSet<SourceTag>>,
    /// Profile topic to expand the query with.
    pub topic: Option<String>,
    pub results: Option<usize>,
    pub token: Option<String>,
}

impl SearchRequest {
    pub fn new(query: impl Into<String>) -> Self {
        SearchRequest {
            query: query.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VisitResult {
    Recorded(Vec<String>),
    NoOp,
    UnknownResult,
}

/// Assignments of recently returned results, for visit events.
#[derive(Debug, Default)]
struct ResultCache {
    order: VecDeque<String>,
    map: HashMap<String, CategoryAssignment>,
}

impl ResultCache {
    fn insert(&mut self, a: CategoryAssignment) {
        if self.map.insert(a.result.clone(), a.clone()).is_none() {
            self.order.push_back(a.result);
            while self.order.len() > RESULT_CACHE {
                if let Some(old) = self.order.pop_front() {
                    self.map.remove(&old);
                }
            }
        }
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    taxonomy: Arc<Taxonomy>,
    classifier: Arc<Classifier>,
    stats: Arc<TermCategoryStats>,
    tokenizer: Arc<Tokenizer>,
    registry: BackendRegistry,
    local: Option<Arc<LocalIndexBackend>>,
    profiles: ProfileStore,
    recent: Mutex<ResultCache>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("backends", &self.registry.len())
            .field("categories", &self.taxonomy.len())
            .finish()
    }
}

impl Pipeline {
    /// Loads the taxonomy and every configured store. A missing index file
    /// yields an empty index; a missing records file surfaces per search.
    pub fn from_config(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let taxonomy = Taxonomy::load(&config.taxonomy, config.pages.as_deref())?;
        let mut registry = BackendRegistry::new();

        let index = if config.index.exists() {
            InvertedIndex::load(&config.index)?
        } else {
            IndexWriter::new().commit()
        };
        let local = Arc::new(LocalIndexBackend::new(index));
        registry.register(
            BackendDescriptor::new("crawl", BackendKind::LocalIndex, SourceTag::Crawl, 0),
            local.clone(),
        )?;
        if let Some(p) = &config.records {
            registry.register(
                BackendDescriptor::new("records", BackendKind::StructuredRecords, SourceTag::StructuredRecords, 1),
                Arc::new(RecordsBackend::open(p)),
            )?;
        }
        if let Some(p) = &config.desktop {
            registry.register(
                BackendDescriptor::new("desktop", BackendKind::Desktop, SourceTag::Desktop, 2),
                Arc::new(DesktopBackend::open(p)?),
            )?;
        }
        let timeout = Duration::from_millis(config.backend_timeout_ms);
        for r in &config.remote {
            let mut d = BackendDescriptor::new(&r.name, BackendKind::Remote, SourceTag::Remote, r.priority);
            d.private = r.private;
            d.score_floor = r.score_floor;
            registry.register(d, Arc::new(RemoteBackend::new(&r.name, &r.url, timeout)?))?;
        }
        let profiles = ProfileStore::open(&config.profiles)?;
        let mut p = Self::new(config, taxonomy, registry, profiles)?;
        p.local = Some(local);
        Ok(p)
    }

    /// Assembles a pipeline from parts, for custom backends.
    pub fn new(
        config: PipelineConfig,
        taxonomy: Taxonomy,
        registry: BackendRegistry,
        profiles: ProfileStore,
    ) -> Result<Self> {
        config.validate()?;
        let tokenizer = Arc::new(Tokenizer::default());
        let classifier = Classifier::build_with(&taxonomy, config.voting, tokenizer.clone())?;
        let stats = TermCategoryStats::build(&taxonomy, &tokenizer)?;
        Ok(Pipeline {
            config,
            taxonomy: Arc::new(taxonomy),
            classifier: Arc::new(classifier),
            stats: Arc::new(stats),
            tokenizer,
            registry,
            local: None,
            profiles,
            recent: Mutex::new(ResultCache::default()),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn stats(&self) -> &TermCategoryStats {
        &self.stats
    }

    pub fn registry(&self) -> &BackendRegistry {
        &self.registry
    }

    pub fn profiles(&self) -> &ProfileStore {
        &self.profiles
    }

    /// Swaps in a freshly built crawl index.
    pub fn replace_index(&self, index: InvertedIndex) -> bool {
        match &self.local {
            Some(l) => {
                l.replace(index);
                true
            }
            None => false,
        }
    }

    fn classification_text(&self, doc: &Document) -> String {
        format!("{}\n{}", doc.title, doc.snippet(self.config.snippet_chars))
    }

    fn expansion_topic(&self, req: &SearchRequest) -> Option<String> {
        if let Some(t) = &req.topic {
            return Some(t.clone());
        }
        let depth = self.taxonomy.profile_depth();
        req.categories
            .iter()
            .find(|c| path_depth(c) >= depth)
            .and_then(|c| self.taxonomy.topic_of(c))
            .map(String::from)
    }

    pub async fn run(&self, req: &SearchRequest) -> Result<SearchResponse> {
        let query = req.query.trim();
        if query.is_empty() {
            return Err(Error::InvalidRequest {
                field: "q",
                message: "query must not be empty".into(),
            });
        }
        if let Some(bad) = req.categories.iter().find(|c| !self.taxonomy.contains(c)) {
            return Err(Error::UnknownCategory(bad.clone()).in_stage("filter"));
        }
        let profile = match &req.user {
            Some(u) => self.profiles.get_or_empty(u)?,
            None => Arc::new(UserProfile::empty("")),
        };
        let mut flags = ResponseFlags::default();

        // 1. expansion
        let mut executed = query.to_string();
        if self.config.expansion {
            if let Some(topic) = self.expansion_topic(req) {
                let e = expand_query(query, &topic, &self.stats, &self.tokenizer, self.config.expansion_cap)
                    .map_err(|e| e.in_stage("expand"))?;
                flags.no_expansion = e.no_expansion;
                flags.expanded_with = e.added.into_iter().map(|a| a.0).collect();
                executed = e.query;
            }
        }

        // 2. dispatch and merge
        let sources = req.sources.as_ref().unwrap_or(&self.config.sources);
        let allow_private = match (&self.config.visibility_token, &req.token) {
            (Some(want), Some(got)) => want == got,
            _ => false,
        };
        let backends = select_backends(&executed, &self.registry, sources, allow_private);
        if backends.is_empty() {
            return Err(Error::NoBackends);
        }
        let k = req.results.unwrap_or(self.config.results).max(1);
        let outcome = dispatch(
            &executed,
            &backends,
            k,
            Duration::from_millis(self.config.backend_timeout_ms),
        )
        .await;
        flags.dispatched = outcome.results.iter().map(|r| r.name.clone()).collect();
        flags.backend_failures = outcome
            .failures()
            .map(|(n, m)| BackendFailure {
                backend: n.to_string(),
                message: m.to_string(),
            })
            .collect();
        if outcome.all_failed {
            flags.all_failed = true;
            return Ok(SearchResponse::empty(query, &executed, flags));
        }
        let lists: Vec<(i32, RankedList)> = outcome.results.into_iter().map(|r| (r.priority, r.list)).collect();
        let mut merged = merge_results(&executed, &lists);
        merged.truncate(k);

        // 3. categorize
        let assignments: HashMap<String, CategoryAssignment> = merged
            .entries
            .iter()
            .map(|e| {
                let a = self.classifier.categorize(&e.doc.url, &self.classification_text(&e.doc));
                (e.doc.url.clone(), a)
            })
            .collect();

        // 5. filter, ahead of clustering so clusters describe what is shown
        let filtered = filter_by_categories(merged, &assignments, &req.categories, &self.taxonomy)
            .map_err(|e| e.in_stage("filter"))?;

        // 4. cluster
        let clusters = if self.config.cluster && !filtered.is_empty() {
            let texts: Vec<(String, String)> = filtered
                .entries
                .iter()
                .map(|e| (e.doc.url.clone(), self.classification_text(&e.doc)))
                .collect();
            let refs: Vec<(&str, &str)> = texts.iter().map(|(u, t)| (u.as_str(), t.as_str())).collect();
            let assigned: Vec<CategoryAssignment> = filtered.entries.iter().map(|e| assignments[&e.doc.url].clone()).collect();
            cluster_results(&self.classifier, &self.tokenizer, &refs, &assigned, self.config.kmeans_max_iter)
                .map_err(|e| e.in_stage("cluster"))?
        } else {
            ClusterOutcome::default()
        };
        flags.unconverged = clusters.unconverged;
        flags.flagged_seeds = clusters.flagged.clone();

        // 6. re-rank
        let ranked = rerank_by_profile(filtered, &assignments, &profile, &self.taxonomy);

        {
            let mut cache = self.recent.lock().expect("result cache poisoned");
            for e in &ranked.entries {
                cache.insert(assignments[&e.doc.url].clone());
            }
        }

        let entries: Vec<SearchEntry> = ranked
            .entries
            .iter()
            .map(|e| {
                let a = &assignments[&e.doc.url];
                SearchEntry {
                    url: e.doc.url.clone(),
                    title: e.doc.title.clone(),
                    snippet: e.doc.snippet(self.config.snippet_chars),
                    score: e.score,
                    category: a.primary.clone(),
                    secondary: a.secondary.clone(),
                    cluster: clusters.label_of(&e.doc.url).map(String::from),
                    source: e.source,
                    backend: e.backend.clone(),
                }
            })
            .collect();
        let mut facets: BTreeMap<String, usize> = BTreeMap::new();
        for e in &entries {
            *facets.entry(e.category.clone()).or_default() += 1;
        }
        let clusters = clusters
            .clusters
            .iter()
            .map(|c| ClusterSummary {
                label: c.label.clone(),
                size: c.members.len(),
            })
            .collect();
        let mut warnings = ranked.warnings;
        warnings.sort();
        warnings.dedup();
        Ok(SearchResponse {
            query: query.to_string(),
            executed,
            entries,
            facets,
            clusters,
            flags,
            warnings,
        })
    }

    /// Records a visit to a result from an earlier response. Unknown users
    /// get a fresh profile.
    pub fn visit(&self, user: &str, url: &str) -> Result<VisitResult> {
        let assignment = self.recent.lock().expect("result cache poisoned").map.get(url).cloned();
        let Some(a) = assignment else {
            return Ok(VisitResult::UnknownResult);
        };
        self.visit_assignment(user, &a)
    }

    pub fn visit_assignment(&self, user: &str, assignment: &CategoryAssignment) -> Result<VisitResult> {
        if !assignment.is_classified() {
            return Ok(VisitResult::NoOp);
        }
        let taxonomy = self.taxonomy.clone();
        let (_, outcome) = self.profiles.update(user, |p| record_visit(p, assignment, &taxonomy))?;
        Ok(match outcome {
            VisitOutcome::Incremented(t) => VisitResult::Recorded(t),
            VisitOutcome::NoOp => VisitResult::NoOp,
        })
    }
}

/// Crawl-store records as searchable documents keyed by URL.
pub fn crawl_documents(records: &[PageRecord]) -> Vec<Document> {
    let mut seen = BTreeSet::new();
    records
        .iter()
        .filter(|r| (200..300).contains(&r.status) && seen.insert(r.url.clone()))
        .map(|r| Document::new(&r.url, &r.url, &r.title, &r.text, SourceTag::Crawl))
        .collect()
}

/// Builds an index from a crawl store file and writes it to `out`.
pub fn build_crawl_index(rdb: &Path, out: &Path) -> Result<InvertedIndex> {
    let records = read_records(rdb)?;
    let mut w = IndexWriter::new();
    for d in crawl_documents(&records) {
        w.add(d)?;
    }
    let index = w.commit();
    index.save(out)?;
    Ok(index)
}
