use std::collections::HashMap;

use super::ranked::{RankedEntry, RankedList};

/// Min-max normalization to [0, 1]; a list whose scores are all equal maps
/// every entry to 1.
pub fn min_max_normalize(list: &RankedList) -> Vec<f64> {
    let (min, max) = list
        .entries
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.score), hi.max(e.score)));
    list.entries
        .iter()
        .map(|e| if max > min { (e.score - min) / (max - min) } else { 1.0 })
        .collect()
}

/// CombSUM over min-max normalized lists. Entries sharing a URL are merged
/// by summing; ties resolve by backend priority, then URL. Each input is a
/// `(backend priority, list)` pair.
pub fn merge_results(query: &str, lists: &[(i32, RankedList)]) -> RankedList {
    struct Acc {
        entry: RankedEntry,
        score: f64,
        priority: i32,
    }
    let mut order: Vec<&(i32, RankedList)> = lists.iter().collect();
    order.sort_by_key(|(p, _)| *p);

    let mut merged: HashMap<String, Acc> = HashMap::new();
    let mut warnings = Vec::new();
    for (priority, list) in order {
        warnings.extend(list.warnings.iter().cloned());
        // a URL counts once per list
        let mut best: HashMap<&str, f64> = HashMap::new();
        let norm = min_max_normalize(list);
        for (e, s) in list.entries.iter().zip(norm) {
            let slot = best.entry(e.doc.url.as_str()).or_insert(f64::NEG_INFINITY);
            *slot = slot.max(s);
        }
        for e in &list.entries {
            let Some(s) = best.remove(e.doc.url.as_str()) else {
                continue;
            };
            merged
                .entry(e.doc.url.clone())
                .and_modify(|acc| acc.score += s)
                .or_insert_with(|| Acc {
                    entry: e.clone(),
                    score: s,
                    priority: *priority,
                });
        }
    }

    let mut accs: Vec<Acc> = merged.into_values().collect();
    accs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.priority.cmp(&b.priority))
            .then_with(|| a.entry.doc.url.cmp(&b.entry.doc.url))
    });
    RankedList {
        query: query.to_string(),
        entries: accs
            .into_iter()
            .map(|a| RankedEntry { score: a.score, ..a.entry })
            .collect(),
        warnings,
    }
}
