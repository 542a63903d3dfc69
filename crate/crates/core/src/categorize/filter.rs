use std::collections::HashMap;

use super::vote::CategoryAssignment;
use crate::error::{Error, Result};
use crate::index::RankedList;
use crate::taxonomy::{is_under, Taxonomy};

/// Keeps results whose primary or secondary category lies under a selected
/// path, preserving order. An empty selection passes everything through.
/// `assignments` is keyed by result URL.
pub fn filter_by_categories(
    list: RankedList,
    assignments: &HashMap<String, CategoryAssignment>,
    selected: &[String],
    taxonomy: &Taxonomy,
) -> Result<RankedList> {
    if let Some(bad) = selected.iter().find(|p| !taxonomy.contains(p)) {
        return Err(Error::UnknownCategory(bad.clone()));
    }
    if selected.is_empty() {
        return Ok(list);
    }
    let RankedList {
        query,
        entries,
        warnings,
    } = list;
    let entries = entries
        .into_iter()
        .filter(|e| {
            assignments.get(&e.doc.url).is_some_and(|a| {
                a.is_classified() && a.categories().any(|c| selected.iter().any(|s| is_under(c, s)))
            })
        })
        .collect();
    Ok(RankedList {
        query,
        entries,
        warnings,
    })
}
