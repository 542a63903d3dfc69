use std::collections::{HashMap, HashSet};

use serde::Serialize;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageRankOutcome {
    pub ranks: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub delta: f64,
    pub converged: bool,
}

/// Power iteration of
/// `r(a) = d * (sum_{b->a} r(b)/o(b) + sum_{sinks} r(s)/N) + (1 - d)`
/// from `r = 1`, so that ranks sum to N (mean rank 1).
///
/// `outlinks[b]` lists the targets of node `b`; duplicates are counted.
pub fn pagerank(outlinks: &[Vec<usize>], damping: f64, tol: f64, max_iter: usize) -> PageRankOutcome {
    let n = outlinks.len();
    let mut ranks = vec![1.0; n];
    if n == 0 {
        return PageRankOutcome {
            ranks,
            iterations: 0,
            delta: 0.0,
            converged: true,
        };
    }
    let nf = n as f64;
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let sink_mass: f64 = outlinks
            .iter()
            .zip(&ranks)
            .filter(|(out, _)| out.is_empty())
            .map(|(_, r)| r)
            .sum();
        next.fill(damping * sink_mass / nf + (1.0 - damping));
        for (src, targets) in outlinks.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let share = damping * ranks[src] / targets.len() as f64;
            for &dst in targets {
                next[dst] += share;
            }
        }
        delta = next.iter().zip(&ranks).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut ranks, &mut next);
        if delta < tol {
            break;
        }
    }
    PageRankOutcome {
        ranks,
        iterations,
        delta,
        converged: delta < tol,
    }
}

/// The crawler's link database: pages, their outlinks and current ranks.
#[derive(Debug, Clone, Default)]
pub struct LinkGraph {
    urls: Vec<String>,
    index: HashMap<String, usize>,
    outlinks: Vec<Vec<usize>>,
    fetched: Vec<bool>,
    ranks: Vec<f64>,
    removed: HashSet<String>,
}

impl LinkGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.urls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.urls.is_empty()
    }

    pub fn contains(&self, url: &str) -> bool {
        self.index.contains_key(url)
    }

    pub fn was_pruned(&self, url: &str) -> bool {
        self.removed.contains(url)
    }

    pub fn urls(&self) -> &[String] {
        &self.urls
    }

    /// Adds a page with rank 1. Returns false if it already exists or was
    /// pruned earlier.
    pub fn add_page(&mut self, url: &str) -> bool {
        if self.index.contains_key(url) || self.removed.contains(url) {
            return false;
        }
        self.index.insert(url.to_string(), self.urls.len());
        self.urls.push(url.to_string());
        self.outlinks.push(Vec::new());
        self.fetched.push(false);
        self.ranks.push(1.0);
        true
    }

    /// Replaces the outlinks of `url`, adding unseen targets as pages.
    /// Duplicate targets collapse; pruned targets are skipped.
    pub fn set_outlinks<'a>(&mut self, url: &str, targets: impl IntoIterator<Item = &'a str>) {
        self.add_page(url);
        let mut ids = Vec::new();
        for t in targets {
            self.add_page(t);
            if let Some(&id) = self.index.get(t) {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        let src = self.index[url];
        self.outlinks[src] = ids;
    }

    pub fn outlinks(&self, url: &str) -> Vec<&str> {
        self.index.get(url).map_or_else(Vec::new, |&i| {
            self.outlinks[i].iter().map(|&j| self.urls[j].as_str()).collect()
        })
    }

    pub fn out_degree(&self, url: &str) -> usize {
        self.index.get(url).map_or(0, |&i| self.outlinks[i].len())
    }

    pub fn mark_fetched(&mut self, url: &str) {
        if let Some(&i) = self.index.get(url) {
            self.fetched[i] = true;
        }
    }

    pub fn is_fetched(&self, url: &str) -> bool {
        self.index.get(url).is_some_and(|&i| self.fetched[i])
    }

    /// Pages without outlinks.
    pub fn sinks(&self) -> Vec<&str> {
        self.outlinks
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_empty())
            .map(|(i, _)| self.urls[i].as_str())
            .collect()
    }

    pub fn rank(&self, url: &str) -> Option<f64> {
        self.index.get(url).map(|&i| self.ranks[i])
    }

    pub fn ranks(&self) -> impl Iterator<Item = (&str, f64)> {
        self.urls.iter().map(String::as_str).zip(self.ranks.iter().copied())
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.outlinks
    }

    /// Recomputes and stores ranks for every page.
    pub fn compute_pagerank(&mut self, damping: f64, tol: f64, max_iter: usize) -> PageRankOutcome {
        let outcome = pagerank(&self.outlinks, damping, tol, max_iter);
        self.ranks.clone_from(&outcome.ranks);
        outcome
    }

    /// Removes unfetched pages ranked below `epsilon`, and links to them.
    /// Fetched pages are never removed. Returns the removed URLs.
    pub fn prune_low_rank(&mut self, epsilon: f64) -> Vec<String> {
        let drop: Vec<bool> = (0..self.len())
            .map(|i| !self.fetched[i] && self.ranks[i] < epsilon)
            .collect();
        if !drop.iter().any(|&d| d) {
            return Vec::new();
        }
        let mut remap = vec![usize::MAX; self.len()];
        let mut next = 0;
        for (i, &d) in drop.iter().enumerate() {
            if !d {
                remap[i] = next;
                next += 1;
            }
        }
        let mut removed = Vec::new();
        let mut urls = Vec::with_capacity(next);
        let mut outlinks = Vec::with_capacity(next);
        let mut fetched = Vec::with_capacity(next);
        let mut ranks = Vec::with_capacity(next);
        for i in 0..self.len() {
            if drop[i] {
                removed.push(std::mem::take(&mut self.urls[i]));
                continue;
            }
            urls.push(std::mem::take(&mut self.urls[i]));
            outlinks.push(
                self.outlinks[i]
                    .iter()
                    .filter(|&&j| !drop[j])
                    .map(|&j| remap[j])
                    .collect(),
            );
            fetched.push(self.fetched[i]);
            ranks.push(self.ranks[i]);
        }
        self.index = urls.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        self.urls = urls;
        self.outlinks = outlinks;
        self.fetched = fetched;
        self.ranks = ranks;
        self.removed.extend(removed.iter().cloned());
        removed
    }
}
