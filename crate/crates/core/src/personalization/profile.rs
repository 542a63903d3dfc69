use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::categorize::CategoryAssignment;
use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user: String,
    /// Topic path to weight; absent topics weigh 0.
    pub weights: BTreeMap<String, u64>,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
}

impl UserProfile {
    pub fn empty(user: impl Into<String>) -> Self {
        let now = Utc::now();
        UserProfile {
            user: user.into(),
            weights: BTreeMap::new(),
            created: now,
            updated: now,
        }
    }

    pub fn weight(&self, topic: &str) -> u64 {
        self.weights.get(topic).copied().unwrap_or(0)
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.values().copied().max().unwrap_or(0)
    }

    /// True when every weight is zero.
    pub fn is_neutral(&self) -> bool {
        self.max_weight() == 0
    }
}

pub fn init_profile(user: &str, topics: &[(String, i64)], taxonomy: &Taxonomy) -> Result<UserProfile> {
    let valid: BTreeSet<&str> = taxonomy
        .effective_profile_topics()
        .into_iter()
        .map(|c| c.path.as_str())
        .collect();
    let mut profile = UserProfile::empty(user);
    for (topic, weight) in topics {
        if !valid.contains(topic.as_str()) {
            return Err(Error::InvalidTopic(topic.clone()));
        }
        if *weight < 0 {
            return Err(Error::NegativeWeight {
                topic: topic.clone(),
                weight: *weight,
            });
        }
        if profile.weights.insert(topic.clone(), *weight as u64).is_some() {
            return Err(Error::DuplicateTopic(topic.clone()));
        }
    }
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "topics", rename_all = "kebab-case")]
pub enum VisitOutcome {
    Incremented(Vec<String>),
    /// The result was unclassified or sits above profile depth.
    NoOp,
}

/// Adds one to the profile topic of the primary category and, when it falls
/// under a different topic, of the secondary category.
pub fn record_visit(profile: &mut UserProfile, assignment: &CategoryAssignment, taxonomy: &Taxonomy) -> VisitOutcome {
    let topics: BTreeSet<&str> = assignment.categories().filter_map(|c| taxonomy.topic_of(c)).collect();
    if !assignment.is_classified() || topics.is_empty() {
        tracing::info!(user = %profile.user, result = %assignment.result, "visit has no profile topic; ignored");
        return VisitOutcome::NoOp;
    }
    for t in &topics {
        *profile.weights.entry(t.to_string()).or_insert(0) += 1;
    }
    profile.updated = Utc::now();
    VisitOutcome::Incremented(topics.into_iter().map(String::from).collect())
}
