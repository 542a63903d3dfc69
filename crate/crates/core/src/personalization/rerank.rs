use std::collections::HashMap;

use super::profile::UserProfile;
use crate::categorize::CategoryAssignment;
use crate::index::RankedList;
use crate::taxonomy::Taxonomy;

/// Boosts each score by `1 + w / W`, `w` being the profile weight of the
/// result's topic and `W` the largest weight (at least 1), then re-sorts by
/// score, keeping the incoming order among equal scores.
pub fn rerank_by_profile(
    mut list: RankedList,
    assignments: &HashMap<String, CategoryAssignment>,
    profile: &UserProfile,
    taxonomy: &Taxonomy,
) -> RankedList {
    if profile.is_neutral() {
        return list;
    }
    let big_w = profile.max_weight().max(1) as f64;
    for e in &mut list.entries {
        let w = assignments
            .get(&e.doc.url)
            .filter(|a| a.is_classified())
            .and_then(|a| taxonomy.topic_of(&a.primary))
            .map(|t| profile.weight(t))
            .unwrap_or(0);
        e.score *= 1.0 + w as f64 / big_w;
    }
    list.entries.sort_by(|a, b| b.score.total_cmp(&a.score));
    list
}
