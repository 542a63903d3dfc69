use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::vote::{CategoryAssignment, UNCLASSIFIED};
use super::Classifier;
use crate::error::{Error, Result};
use crate::taxonomy::ancestor_at_depth;
use crate::text::{cosine_similarity, tfidf_vector, TermVector, Tokenizer, Vocabulary};

pub const DEFAULT_MAX_ITER: usize = 50;

/// Depth-1 ancestor of a category; unclassified stays unclassified.
pub fn top_level(category: &str) -> &str {
    if category == UNCLASSIFIED {
        return UNCLASSIFIED;
    }
    ancestor_at_depth(category, 1).unwrap_or(category)
}

/// Distinct top-level groups among primary categories, unclassified counting
/// as one group.
pub fn choose_cluster_count(assignments: &[CategoryAssignment]) -> usize {
    assignments
        .iter()
        .map(|a| top_level(&a.primary))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Top-level categories eligible to seed a cluster, sorted.
pub fn seed_candidates(assignments: &[CategoryAssignment]) -> Vec<String> {
    assignments
        .iter()
        .filter(|a| a.is_classified())
        .map(|a| top_level(&a.primary).to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `sim[c][r]`: best similarity of result `r` to any category-document under
/// candidate `c`.
pub fn seed_similarities(classifier: &Classifier, result_texts: &[&str], candidates: &[String]) -> Vec<Vec<f64>> {
    let vectors: Vec<TermVector> = result_texts.iter().map(|t| classifier.vectorize(t)).collect();
    candidates
        .iter()
        .map(|c| vectors.iter().map(|v| classifier.subtree_similarity(v, c)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub candidate: usize,
    pub result: usize,
    pub similarity: f64,
    /// Seeded by an arbitrary unused result, not by similarity.
    pub flagged: bool,
}

/// Greedy matching of candidates to results in descending similarity, each
/// result seeding at most one cluster. Candidates left over take the lowest
/// unused result and are flagged; with fewer results than candidates the
/// surplus candidates get no seed. Output is ordered by candidate.
pub fn seed_centroids(sim: &[Vec<f64>], n_results: usize) -> Vec<Seed> {
    let mut pairs: Vec<(usize, usize, f64)> = sim
        .iter()
        .enumerate()
        .flat_map(|(c, row)| row.iter().enumerate().map(move |(r, &s)| (c, r, s)))
        .filter(|&(_, r, s)| s > 0.0 && r < n_results)
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));

    let mut seed_of: Vec<Option<Seed>> = vec![None; sim.len()];
    let mut used = vec![false; n_results];
    let mut budget = n_results.min(sim.len());
    for (c, r, s) in pairs {
        if budget == 0 {
            break;
        }
        if seed_of[c].is_none() && !used[r] {
            seed_of[c] = Some(Seed {
                candidate: c,
                result: r,
                similarity: s,
                flagged: false,
            });
            used[r] = true;
            budget -= 1;
        }
    }
    for (c, slot) in seed_of.iter_mut().enumerate() {
        if budget == 0 {
            break;
        }
        if slot.is_none() {
            let r = used.iter().position(|u| !u).expect("budget bounds used results");
            used[r] = true;
            budget -= 1;
            *slot = Some(Seed {
                candidate: c,
                result: r,
                similarity: 0.0,
                flagged: true,
            });
        }
    }
    seed_of.into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    pub assignment: Vec<usize>,
    pub centroids: Vec<TermVector>,
    /// Objective after each centroid update.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `Σ (1 − cos(x, centroid of x))`.
pub fn objective(vectors: &[TermVector], assignment: &[usize], centroids: &[TermVector]) -> f64 {
    vectors
        .iter()
        .zip(assignment)
        .map(|(x, &a)| 1.0 - cosine_similarity(x, &centroids[a]))
        .sum()
}

fn nearest(x: &TermVector, centroids: &[TermVector]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let s = cosine_similarity(x, c);
        if s > best_sim {
            best = j;
            best_sim = s;
        }
    }
    best
}

fn mean_direction(members: impl Iterator<Item = TermVector>) -> TermVector {
    TermVector::from_entries(members.flat_map(|v| v.entries().to_vec())).normalized()
}

/// Spherical k-means seeded with the points at `seeds`.
pub fn kmeans(vectors: &[TermVector], seeds: &[usize], max_iter: usize) -> Result<KMeansOutcome> {
    if seeds.is_empty() || seeds.iter().any(|&s| s >= vectors.len()) {
        return Err(Error::Config("seeds must index into the points".into()));
    }
    if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
        return Err(Error::Config("seeds must be distinct".into()));
    }
    let points: Vec<TermVector> = vectors.iter().map(TermVector::normalized).collect();
    let k = seeds.len();
    let mut centroids: Vec<TermVector> = seeds.iter().map(|&s| points[s].clone()).collect();
    let mut assignment: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let mut next: Vec<usize> = points.iter().map(|x| nearest(x, &centroids)).collect();
        reseed_empty(&points, &centroids, &mut next, k);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
        iterations += 1;
        for (j, c) in centroids.iter_mut().enumerate() {
            let m = mean_direction(
                points
                    .iter()
                    .zip(&assignment)
                    .filter(|(_, &a)| a == j)
                    .map(|(x, _)| x.clone()),
            );
            if !m.is_empty() {
                *c = m;
            }
        }
        history.push(objective(&points, &assignment, &centroids));
    }
    Ok(KMeansOutcome {
        assignment,
        centroids,
        objective_history: history,
        iterations,
        converged,
    })
}

/// Gives every empty cluster the point farthest from its current centroid,
/// taken from a cluster that can spare one.
fn reseed_empty(points: &[TermVector], centroids: &[TermVector], assignment: &mut [usize], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let far = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .map(|i| (i, 1.0 - cosine_similarity(&points[i], &centroids[assignment[i]])))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            sizes[assignment[i]] -= 1;
            assignment[i] = j;
            sizes[j] = 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub label: String,
    #[serde(skip)]
    pub centroid: TermVector,
    /// Result URLs in input order.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterOutcome {
    pub clusters: Vec<Cluster>,
    pub unconverged: bool,
    /// Labels whose seed was not chosen by similarity.
    pub flagged: Vec<String>,
    pub objective_history: Vec<f64>,
}

impl ClusterOutcome {
    pub fn label_of(&self, url: &str) -> Option<&str> {
        self.clusters
            .iter()
            .find(|c| c.members.iter().any(|m| m == url))
            .map(|c| c.label.as_str())
    }
}

/// Clusters results given as `(url, text)` alongside their assignments.
/// Results are vectorized over their own vocabulary; seeds come from the
/// classified top-level categories.
pub fn cluster_results(
    classifier: &Classifier,
    tokenizer: &Tokenizer,
    results: &[(&str, &str)],
    assignments: &[CategoryAssignment],
    max_iter: usize,
) -> Result<ClusterOutcome> {
    if results.is_empty() || choose_cluster_count(assignments) == 0 {
        return Ok(ClusterOutcome::default());
    }
    let candidates = seed_candidates(assignments);
    if candidates.is_empty() {
        return Ok(ClusterOutcome::default());
    }
    let texts: Vec<&str> = results.iter().map(|r| r.1).collect();
    let sim = seed_similarities(classifier, &texts, &candidates);
    let seeds = seed_centroids(&sim, results.len());

    let streams: Vec<_> = texts.iter().map(|t| tokenizer.tokenize(t)).collect();
    let vocab = Vocabulary::build(&streams)?;
    let vectors: Vec<TermVector> = streams.iter().map(|s| tfidf_vector(s, &vocab)).collect();
    let seed_points: Vec<usize> = seeds.iter().map(|s| s.result).collect();
    let km = kmeans(&vectors, &seed_points, max_iter)?;

    let clusters = seeds
        .iter()
        .enumerate()
        .map(|(j, s)| Cluster {
            label: candidates[s.candidate].clone(),
            centroid: km.centroids[j].clone(),
            members: results
                .iter()
                .zip(&km.assignment)
                .filter(|(_, &a)| a == j)
                .map(|(r, _)| r.0.to_string())
                .collect(),
        })
        .collect();
    Ok(ClusterOutcome {
        clusters,
        unconverged: !km.converged,
        flagged: seeds.iter().filter(|s| s.flagged).map(|s| candidates[s.candidate].clone()).collect(),
        objective_history: km.objective_history,
    })
}
