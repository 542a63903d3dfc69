use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::{Duration, Instant};

use url::Url;

#[derive(Debug, Clone)]
struct Entry {
    priority: f64,
    url: String,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap: higher priority first, then lexicographically smaller URL.
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.url.cmp(&self.url))
    }
}

/// Per-host access times enforcing a minimum delay between requests.
#[derive(Debug, Clone, Default)]
pub struct Politeness {
    delay: Duration,
    last_access: HashMap<String, Instant>,
}

impl Politeness {
    pub fn new(delay: Duration) -> Self {
        Politeness {
            delay,
            last_access: HashMap::new(),
        }
    }

    pub fn delay(&self) -> Duration {
        self.delay
    }

    pub fn ready_at(&self, host: &str) -> Option<Instant> {
        self.last_access.get(host).map(|t| *t + self.delay)
    }

    pub fn is_ready(&self, host: &str, now: Instant) -> bool {
        self.delay.is_zero() || self.ready_at(host).is_none_or(|t| t <= now)
    }

    pub fn record(&mut self, host: &str, now: Instant) {
        self.last_access.insert(host.to_string(), now);
    }
}

pub fn host_key(url: &str) -> String {
    Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(|h| format!("{h}:{}", u.port_or_known_default().unwrap_or(0))))
        .unwrap_or_default()
}

/// Priority queue of URLs awaiting fetch, ordered by rank.
#[derive(Debug, Clone, Default)]
pub struct Frontier {
    heap: BinaryHeap<Entry>,
    pending: HashMap<String, f64>,
    seen: HashSet<String>,
    fetched: HashSet<String>,
}

impl Frontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn has_seen(&self, url: &str) -> bool {
        self.seen.contains(url)
    }

    pub fn is_pending(&self, url: &str) -> bool {
        self.pending.contains_key(url)
    }

    pub fn priority(&self, url: &str) -> Option<f64> {
        self.pending.get(url).copied()
    }

    pub fn pending(&self) -> impl Iterator<Item = (&str, f64)> {
        self.pending.iter().map(|(u, p)| (u.as_str(), *p))
    }

    /// Queues a URL never queued before. Returns false for repeats.
    pub fn push(&mut self, url: &str, priority: f64) -> bool {
        if !self.seen.insert(url.to_string()) {
            return false;
        }
        self.pending.insert(url.to_string(), priority);
        self.heap.push(Entry {
            priority,
            url: url.to_string(),
        });
        true
    }

    pub fn remove(&mut self, url: &str) -> bool {
        self.pending.remove(url).is_some()
    }

    pub fn mark_fetched(&mut self, url: &str) {
        self.pending.remove(url);
        self.seen.insert(url.to_string());
        self.fetched.insert(url.to_string());
    }

    pub fn fetched(&self) -> &HashSet<String> {
        &self.fetched
    }

    /// Replaces every pending priority with `rank(url)` where it is known.
    pub fn reprioritize(&mut self, rank: impl Fn(&str) -> Option<f64>) {
        for (url, p) in self.pending.iter_mut() {
            if let Some(r) = rank(url) {
                *p = r;
            }
        }
        self.heap = self
            .pending
            .iter()
            .map(|(url, &priority)| Entry {
                priority,
                url: url.clone(),
            })
            .collect();
    }

    fn pop_live(&mut self) -> Option<Entry> {
        while let Some(entry) = self.heap.pop() {
            match self.pending.get(&entry.url) {
                Some(p) if p.to_bits() == entry.priority.to_bits() => return Some(entry),
                _ => continue,
            }
        }
        None
    }

    /// Highest-priority URL, removed from the queue.
    pub fn pop(&mut self) -> Option<(String, f64)> {
        let entry = self.pop_live()?;
        self.pending.remove(&entry.url);
        Some((entry.url, entry.priority))
    }

    /// Up to `width` URLs in priority order. Under a non-zero per-host delay
    /// a host appears at most once per batch and only once its delay has
    /// elapsed; skipped URLs stay queued for a later batch.
    pub fn next_batch(&mut self, width: usize, politeness: &mut Politeness, now: Instant) -> Vec<(String, f64)> {
        let mut batch = Vec::new();
        let mut deferred = Vec::new();
        let mut hosts = HashSet::new();
        while batch.len() < width {
            let Some(entry) = self.pop_live() else { break };
            let host = host_key(&entry.url);
            let blocked = !politeness.delay().is_zero()
                && (hosts.contains(&host) || !politeness.is_ready(&host, now));
            if blocked {
                deferred.push(entry);
                continue;
            }
            politeness.record(&host, now);
            hosts.insert(host);
            self.pending.remove(&entry.url);
            batch.push((entry.url, entry.priority));
        }
        self.heap.extend(deferred);
        batch
    }

    /// Earliest time a pending URL's host accepts a request again.
    pub fn next_ready(&self, politeness: &Politeness, now: Instant) -> Option<Instant> {
        self.pending
            .keys()
            .map(|u| politeness.ready_at(&host_key(u)).unwrap_or(now).max(now))
            .min()
    }
}
