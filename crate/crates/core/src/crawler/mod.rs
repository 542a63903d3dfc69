//! Focused crawler: PageRank-prioritized frontier over a seed-domain link graph.

mod crawl;
mod fetch;
mod frontier;
mod graph;
mod store;
mod urls;

pub use crawl::{
    crawl_loop, inject_seeds, parse_seeds, relevance_filter, CrawlAborted, CrawlConfig, CrawlContext,
    CrawlReport, FetchLogEntry, SeedList, StopReason,
};
pub use fetch::{parse_html, FetchResult, Fetcher, FetcherOptions, ParsedPage, ROBOTS_DENIED, USER_AGENT};
pub use frontier::{host_key, Frontier, Politeness};
pub use graph::{pagerank, LinkGraph, PageRankOutcome, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
pub use store::{read_records, PageRecord, PageSink, RecordStore};
pub use urls::{canonicalize, domain_filter, in_domains, registrable_domain, resolve, seed_domains};
