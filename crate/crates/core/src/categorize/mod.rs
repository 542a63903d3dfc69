//! kNN categorization against category-documents, dominant-majority voting,
//! k-means clustering and category filtering.

mod cluster;
mod filter;
mod vote;

pub use cluster::{
    choose_cluster_count, cluster_results, kmeans, objective, seed_candidates, seed_centroids, seed_similarities,
    top_level, Cluster, ClusterOutcome, KMeansOutcome, Seed, DEFAULT_MAX_ITER,
};
pub use filter::filter_by_categories;
pub use vote::{majority_vote, CategoryAssignment, Neighbor, UNCLASSIFIED};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{category_document, is_under, CategoryDocument, Taxonomy};
use crate::text::{cosine_similarity, tfidf_vector, TermVector, Tokenizer, Vocabulary};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VotingParams {
    pub k: usize,
    pub relevance_threshold: f64,
}

impl Default for VotingParams {
    fn default() -> Self {
        VotingParams {
            k: DEFAULT_K,
            relevance_threshold: 0.0,
        }
    }
}

impl VotingParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.relevance_threshold) {
            return Err(Error::Config("relevance threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Category-documents of a taxonomy over their own vocabulary.
#[derive(Debug, Clone)]
pub struct Classifier {
    tokenizer: Arc<Tokenizer>,
    vocab: Vocabulary,
    docs: Vec<CategoryDocument>,
    params: VotingParams,
}

impl Classifier {
    pub fn build(taxonomy: &Taxonomy, params: VotingParams) -> Result<Self> {
        Self::build_with(taxonomy, params, Arc::new(Tokenizer::default()))
    }

    pub fn build_with(taxonomy: &Taxonomy, params: VotingParams, tokenizer: Arc<Tokenizer>) -> Result<Self> {
        params.validate()?;
        let targets = taxonomy.classification_targets(None);
        let streams = targets
            .iter()
            .map(|c| Ok(tokenizer.tokenize(&taxonomy.category_text(&c.path)?)))
            .collect::<Result<Vec<_>>>()?;
        let vocab = Vocabulary::build(&streams)?;
        let docs = targets
            .iter()
            .map(|c| category_document(taxonomy, &c.path, &vocab, &tokenizer))
            .collect::<Result<Vec<_>>>()?;
        Self::from_documents(vocab, docs, params, tokenizer)
    }

    pub fn from_documents(
        vocab: Vocabulary,
        mut docs: Vec<CategoryDocument>,
        params: VotingParams,
        tokenizer: Arc<Tokenizer>,
    ) -> Result<Self> {
        params.validate()?;
        if docs.iter().all(|d| d.vector.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        docs.sort_by(|a, b| a.category.path.cmp(&b.category.path));
        Ok(Classifier {
            tokenizer,
            vocab,
            docs,
            params,
        })
    }

    pub fn params(&self) -> VotingParams {
        self.params
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn documents(&self) -> &[CategoryDocument] {
        &self.docs
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vectorize(&self, text: &str) -> TermVector {
        tfidf_vector(&self.tokenizer.tokenize(text), &self.vocab)
    }

    /// Top-k categories by cosine similarity to `text`; zero-similarity
    /// categories never appear.
    pub fn rank_categories(&self, text: &str, k: usize) -> Vec<Neighbor> {
        rank_categories(&self.vectorize(text), &self.docs, k)
    }

    pub fn top_similarity(&self, text: &str) -> Option<f64> {
        self.rank_categories(text, 1).first().map(|n| n.similarity)
    }

    pub fn categorize(&self, result: &str, text: &str) -> CategoryAssignment {
        majority_vote(result, &self.rank_categories(text, self.params.k))
    }

    /// Highest similarity between `vector` and any category-document at or
    /// below `path`.
    pub fn subtree_similarity(&self, vector: &TermVector, path: &str) -> f64 {
        self.docs
            .iter()
            .filter(|d| is_under(&d.category.path, path))
            .map(|d| cosine_similarity(vector, &d.vector))
            .fold(0.0, f64::max)
    }
}

/// Descending similarity, ties by category path.
pub fn rank_categories(vector: &TermVector, docs: &[CategoryDocument], k: usize) -> Vec<Neighbor> {
    let mut out: Vec<Neighbor> = docs
        .iter()
        .map(|d| Neighbor {
            category: d.category.path.clone(),
            similarity: cosine_similarity(vector, &d.vector),
        })
        .filter(|n| n.similarity > 0.0)
        .collect();
    out.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.category.cmp(&b.category)));
    out.truncate(k);
    out
}
