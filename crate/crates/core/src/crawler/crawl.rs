use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures::future::join_all;
use serde::{Deserialize, Serialize};
use url::Url;

use super::fetch::{FetchResult, Fetcher, FetcherOptions};
use super::frontier::{Frontier, Politeness};
use super::graph::{LinkGraph, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use super::store::{PageRecord, PageSink};
use super::urls::{canonicalize, domain_filter, seed_domains};
use crate::categorize::Classifier;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrawlConfig {
    pub seeds: Vec<String>,
    pub damping: f64,
    pub budget: usize,
    pub per_host_delay_ms: u64,
    pub epsilon: f64,
    pub width: usize,
    pub respect_robots: bool,
    pub timeout_ms: u64,
    pub retries: usize,
    /// Minimum top category similarity for a page to reach RDB.
    pub relevance_threshold: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub resolve: Vec<(String, SocketAddr)>,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            seeds: Vec::new(),
            damping: DEFAULT_DAMPING,
            budget: 100,
            per_host_delay_ms: 500,
            epsilon: 0.1,
            width: 4,
            respect_robots: true,
            timeout_ms: 10_000,
            retries: 0,
            relevance_threshold: 0.0,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            resolve: Vec::new(),
        }
    }
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad("damping must lie in (0, 1)");
        }
        if self.epsilon < 0.0 || self.epsilon.is_nan() {
            return bad("epsilon must be >= 0");
        }
        if self.width == 0 {
            return bad("width must be >= 1");
        }
        if self.budget < self.seeds.len() {
            return bad("budget must be at least the number of seeds");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedList {
    pub urls: Vec<Url>,
    pub warnings: Vec<String>,
}

/// Seed file format: one URL per line, `#` comments.
pub fn parse_seeds(text: &str) -> SeedList {
    let mut list = SeedList::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match canonicalize(line) {
            Some(u) if !list.urls.contains(&u) => list.urls.push(u),
            Some(_) => {}
            None => list.warnings.push(format!("line {}: unparseable seed {line:?}", i + 1)),
        }
    }
    list
}

/// Adds each canonical seed to the graph with rank 1 and queues it.
pub fn inject_seeds(seeds: &[String], graph: &mut LinkGraph, frontier: &mut Frontier) -> Result<SeedList> {
    let list = parse_seeds(&seeds.join("\n"));
    if list.urls.is_empty() {
        return Err(Error::NoSeeds);
    }
    for u in &list.urls {
        graph.add_page(u.as_str());
        frontier.push(u.as_str(), 1.0);
    }
    Ok(list)
}

/// A fetched page is relevant when its best category similarity reaches the
/// threshold. Without a classifier every page is relevant.
pub fn relevance_filter(text: &str, classifier: Option<&Classifier>, threshold: f64) -> bool {
    match classifier {
        None => true,
        Some(c) => c.top_similarity(text).is_some_and(|s| s >= threshold),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FetchLogEntry {
    pub round: usize,
    pub url: String,
    pub priority: f64,
    pub status: u16,
    pub relevant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    FrontierEmpty,
    BudgetExhausted,
    StoreFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrawlReport {
    pub fetched: usize,
    pub kept: usize,
    pub pruned: usize,
    pub attempts: usize,
    pub rounds: usize,
    pub unconverged_rounds: usize,
    pub stop: StopReason,
    pub log: Vec<FetchLogEntry>,
    pub pruned_urls: Vec<String>,
    pub warnings: Vec<String>,
    pub seed_domains: BTreeSet<String>,
}

impl CrawlReport {
    fn new(domains: BTreeSet<String>, warnings: Vec<String>) -> Self {
        CrawlReport {
            fetched: 0,
            kept: 0,
            pruned: 0,
            attempts: 0,
            rounds: 0,
            unconverged_rounds: 0,
            stop: StopReason::FrontierEmpty,
            log: Vec::new(),
            pruned_urls: Vec::new(),
            warnings,
            seed_domains: domains,
        }
    }

    pub fn fetched_urls(&self) -> impl Iterator<Item = &str> {
        self.log.iter().map(|e| e.url.as_str())
    }
}

/// A store write failed; the report covers the work done before it.
#[derive(Debug, thiserror::Error)]
#[error("crawl aborted after {} fetches: {source}", partial.fetched)]
pub struct CrawlAborted {
    pub partial: Box<CrawlReport>,
    #[source]
    pub source: Error,
}

/// Everything the crawl loop needs besides its configuration.
pub struct CrawlContext<'a> {
    pub db: &'a mut dyn PageSink,
    pub rdb: &'a mut dyn PageSink,
    pub classifier: Option<&'a Classifier>,
}

/// Runs batch → fetch → store → extract and filter links → PageRank →
/// prune → reprioritize until the frontier empties or the budget is spent.
pub async fn crawl_loop(config: &CrawlConfig, ctx: CrawlContext<'_>) -> std::result::Result<CrawlReport, CrawlAborted> {
    let early = |e: Error| CrawlAborted {
        partial: Box::new(CrawlReport::new(BTreeSet::new(), Vec::new())),
        source: e,
    };
    config.validate().map_err(early)?;
    let fetcher = Fetcher::new(FetcherOptions {
        timeout: Duration::from_millis(config.timeout_ms),
        respect_robots: config.respect_robots,
        resolve: config.resolve.clone(),
        ..FetcherOptions::default()
    })
    .map_err(early)?;

    let mut graph = LinkGraph::new();
    let mut frontier = Frontier::new();
    let seeds = inject_seeds(&config.seeds, &mut graph, &mut frontier).map_err(early)?;
    let domains = seed_domains(&seeds.urls);
    let mut report = CrawlReport::new(domains.clone(), seeds.warnings);
    let mut politeness = Politeness::new(Duration::from_millis(config.per_host_delay_ms));

    let CrawlContext { db, rdb, classifier } = ctx;

    loop {
        if report.fetched >= config.budget {
            report.stop = StopReason::BudgetExhausted;
            break;
        }
        if frontier.is_empty() {
            report.stop = StopReason::FrontierEmpty;
            break;
        }
        let width = config.width.min(config.budget - report.fetched);
        let batch = frontier.next_batch(width, &mut politeness, Instant::now());
        if batch.is_empty() {
            if let Some(at) = frontier.next_ready(&politeness, Instant::now()) {
                tokio::time::sleep_until(at.into()).await;
            }
            continue;
        }
        report.rounds += 1;

        let results: Vec<(FetchResult, usize)> =
            join_all(batch.iter().map(|(u, _)| fetcher.fetch_with_retries(u, config.retries))).await;

        for ((url, priority), (result, attempts)) in batch.into_iter().zip(results) {
            report.attempts += attempts;
            report.fetched += 1;
            graph.mark_fetched(&url);
            frontier.mark_fetched(&url);

            let record = PageRecord::from(&result);
            let relevant = result.is_success()
                && relevance_filter(&format!("{}\n{}", result.title, result.text), classifier, config.relevance_threshold);
            report.log.push(FetchLogEntry {
                round: report.rounds,
                url: url.clone(),
                priority,
                status: result.status,
                relevant,
            });
            if let Some(err) = &result.error {
                report.warnings.push(format!("{url}: {err}"));
            }

            let stored = db
                .append(&record)
                .and_then(|_| if relevant { rdb.append(&record) } else { Ok(()) });
            if let Err(e) = stored {
                tracing::error!(%url, "store write failed, aborting crawl: {e}");
                report.stop = StopReason::StoreFailure;
                return Err(CrawlAborted {
                    partial: Box::new(report),
                    source: e,
                });
            }
            if relevant {
                report.kept += 1;
            }

            let links: Vec<Url> = result.outlinks.iter().filter_map(|l| canonicalize(l)).collect();
            let links = domain_filter(links, &domains);
            graph.set_outlinks(&url, links.iter().map(Url::as_str));
            for link in &links {
                if graph.contains(link.as_str()) && !frontier.has_seen(link.as_str()) {
                    frontier.push(link.as_str(), graph.rank(link.as_str()).unwrap_or(1.0));
                }
            }
        }

        let outcome = graph.compute_pagerank(config.damping, config.tolerance, config.max_iter);
        if !outcome.converged {
            report.unconverged_rounds += 1;
        }
        for url in graph.prune_low_rank(config.epsilon) {
            frontier.remove(&url);
            report.pruned += 1;
            report.pruned_urls.push(url);
        }
        frontier.reprioritize(|u| graph.rank(u));
        tracing::debug!(round = report.rounds, fetched = report.fetched, pending = frontier.len(), "crawl round");
    }
    Ok(report)
}
