use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const UNCLASSIFIED: &str = "Unclassified";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub category: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAssignment {
    /// The result's URL.
    pub result: String,
    pub primary: String,
    pub secondary: Option<String>,
    pub neighbors: Vec<Neighbor>,
}

impl CategoryAssignment {
    pub fn unclassified(result: impl Into<String>) -> Self {
        CategoryAssignment {
            result: result.into(),
            primary: UNCLASSIFIED.to_string(),
            secondary: None,
            neighbors: Vec::new(),
        }
    }

    pub fn is_classified(&self) -> bool {
        self.primary != UNCLASSIFIED
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.primary.as_str()).chain(self.secondary.as_deref())
    }
}

/// Dominant-majority vote over neighbors in descending similarity order.
///
/// A category held by more than half of the neighbors wins outright. Failing
/// that the top-ranked neighbor's category wins if it is among the most
/// frequent; otherwise the result gets two categories, the top-ranked one
/// first and the most frequent one (the one ranking highest, on ties)
/// second. No neighbors means unclassified.
pub fn majority_vote(result: &str, neighbors: &[Neighbor]) -> CategoryAssignment {
    let Some(top) = neighbors.first() else {
        return CategoryAssignment::unclassified(result);
    };
    // category -> (count, best rank)
    let mut tally: HashMap<&str, (usize, usize)> = HashMap::new();
    for (rank, n) in neighbors.iter().enumerate() {
        tally.entry(n.category.as_str()).or_insert((0, rank)).0 += 1;
    }
    let k = neighbors.len();
    let (majority, &(m, _)) = tally
        .iter()
        .min_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)))
        .expect("non-empty");
    let (primary, secondary) = if 2 * m > k {
        (majority.to_string(), None)
    } else if tally[top.category.as_str()].0 == m {
        (top.category.clone(), None)
    } else {
        (top.category.clone(), Some(majority.to_string()))
    };
    CategoryAssignment {
        result: result.to_string(),
        primary,
        secondary,
        neighbors: neighbors.to_vec(),
    }
}
