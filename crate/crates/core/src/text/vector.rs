use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::TokenStream;
use crate::error::{Error, Result};

pub type TermId = u32;

/// Term dictionary with per-term document frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    ids: HashMap<String, TermId>,
    doc_freq: Vec<u32>,
    num_docs: u32,
}

impl Vocabulary {
    /// Assigns dense ids in first-appearance order and counts, for each term,
    /// the number of documents containing it.
    pub fn build<'a, I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenStream>,
    {
        let mut vocab = Vocabulary::default();
        let mut last_doc: Vec<u32> = Vec::new();
        for doc in docs {
            vocab.num_docs += 1;
            let doc_no = vocab.num_docs;
            for token in doc {
                let id = match vocab.ids.get(token.as_str()) {
                    Some(&id) => id,
                    None => {
                        let id = vocab.terms.len() as TermId;
                        vocab.terms.push(token.clone());
                        vocab.ids.insert(token.clone(), id);
                        vocab.doc_freq.push(0);
                        last_doc.push(0);
                        id
                    }
                };
                let slot = id as usize;
                if last_doc[slot] != doc_no {
                    last_doc[slot] = doc_no;
                    vocab.doc_freq[slot] += 1;
                }
            }
        }
        if vocab.num_docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_docs(&self) -> u32 {
        self.num_docs
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn doc_freq(&self, id: TermId) -> u32 {
        self.doc_freq.get(id as usize).copied().unwrap_or(0)
    }

    pub fn doc_freq_of(&self, term: &str) -> u32 {
        self.id(term).map_or(0, |id| self.doc_freq(id))
    }

    /// `ln(N / df)`; zero for unknown ids.
    pub fn idf(&self, id: TermId) -> f64 {
        match self.doc_freq(id) {
            0 => 0.0,
            df => (self.num_docs as f64 / df as f64).ln(),
        }
    }

    /// Rebuilds the term lookup after deserialization.
    pub fn reindex(&mut self) {
        self.ids = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
    }

    /// Raw occurrence counts of known tokens, sorted by term id.
    pub fn term_counts(&self, tokens: &TokenStream) -> Vec<(TermId, u32)> {
        let mut counts: HashMap<TermId, u32> = HashMap::new();
        for token in tokens {
            if let Some(id) = self.id(token) {
                *counts.entry(id).or_default() += 1;
            }
        }
        let mut counts: Vec<_> = counts.into_iter().collect();
        counts.sort_unstable_by_key(|&(id, _)| id);
        counts
    }
}

/// Sparse non-negative weight vector, entries sorted by term id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    entries: Vec<(TermId, f64)>,
    norm: f64,
}

impl TermVector {
    /// Drops non-positive weights, merges duplicate ids and caches the norm.
    pub fn from_entries(entries: impl IntoIterator<Item = (TermId, f64)>) -> Self {
        let mut entries: Vec<_> = entries.into_iter().filter(|&(_, w)| w > 0.0).collect();
        entries.sort_unstable_by_key(|&(id, _)| id);
        entries.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        TermVector { entries, norm }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scaled(&self, factor: f64) -> TermVector {
        TermVector::from_entries(self.entries.iter().map(|&(id, w)| (id, w * factor)))
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> TermVector {
        if self.norm == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / self.norm)
    }
}

/// `w_i = tf_i * ln(N / df_i)` over the tokens known to `vocab`.
pub fn tfidf_vector(tokens: &TokenStream, vocab: &Vocabulary) -> TermVector {
    TermVector::from_entries(
        vocab
            .term_counts(tokens)
            .into_iter()
            .map(|(id, tf)| (id, tf as f64 * vocab.idf(id))),
    )
}

/// Cosine of the angle between two weight vectors, 0 when either is zero.
pub fn cosine_similarity(a: &TermVector, b: &TermVector) -> f64 {
    if a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (a.norm * b.norm)).clamp(0.0, 1.0)
}
