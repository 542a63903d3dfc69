use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use super::document::Document;
use super::ranked::{RankedEntry, RankedList};
use crate::error::{Error, Result};
use crate::text::{default_tokenizer, tfidf_vector, TermVector, TokenStream, Tokenizer, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

enum TokenizerRef {
    Default,
    Custom(Arc<Tokenizer>),
}

impl TokenizerRef {
    fn get(&self) -> &Tokenizer {
        match self {
            TokenizerRef::Default => default_tokenizer(),
            TokenizerRef::Custom(t) => t,
        }
    }

    fn clone_ref(&self) -> TokenizerRef {
        match self {
            TokenizerRef::Default => TokenizerRef::Default,
            TokenizerRef::Custom(t) => TokenizerRef::Custom(Arc::clone(t)),
        }
    }
}

impl std::fmt::Debug for TokenizerRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenizerRef::Default => f.write_str("Default"),
            TokenizerRef::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Accumulates documents; each `commit` yields an immutable index with idf
/// recomputed over everything added so far.
#[derive(Debug)]
pub struct IndexWriter {
    tokenizer: TokenizerRef,
    docs: Vec<Document>,
    tokens: Vec<TokenStream>,
    ids: HashSet<String>,
}

impl Default for IndexWriter {
    fn default() -> Self {
        IndexWriter {
            tokenizer: TokenizerRef::Default,
            docs: Vec::new(),
            tokens: Vec::new(),
            ids: HashSet::new(),
        }
    }
}

impl IndexWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tokenizer(tokenizer: Arc<Tokenizer>) -> Self {
        IndexWriter {
            tokenizer: TokenizerRef::Custom(tokenizer),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn add(&mut self, doc: Document) -> Result<()> {
        if self.ids.contains(&doc.id) {
            return Err(Error::DuplicateDocument(doc.id));
        }
        self.tokens.push(self.tokenizer.get().tokenize(&doc.full_text()));
        self.ids.insert(doc.id.clone());
        self.docs.push(doc);
        Ok(())
    }

    pub fn commit(&self) -> InvertedIndex {
        let vocab = if self.tokens.is_empty() {
            Vocabulary::default()
        } else {
            Vocabulary::build(&self.tokens).expect("non-empty corpus")
        };
        let mut postings: Vec<Vec<Posting>> = vec![Vec::new(); vocab.len()];
        let mut norms = Vec::with_capacity(self.docs.len());
        for (doc_no, tokens) in self.tokens.iter().enumerate() {
            let mut sq = 0.0;
            for (term, tf) in vocab.term_counts(tokens) {
                postings[term as usize].push(Posting { doc: doc_no as u32, tf });
                let w = tf as f64 * vocab.idf(term);
                sq += w * w;
            }
            norms.push(sq.sqrt());
        }
        InvertedIndex {
            tokenizer: self.tokenizer.clone_ref(),
            docs: self.docs.clone(),
            vocab,
            postings,
            norms,
        }
    }
}

/// Committed, read-only inverted index with tf-idf cosine ranking.
#[derive(Debug)]
pub struct InvertedIndex {
    tokenizer: TokenizerRef,
    docs: Vec<Document>,
    vocab: Vocabulary,
    postings: Vec<Vec<Posting>>,
    norms: Vec<f64>,
}

/// Builds and commits an index in one go.
pub fn index_documents(docs: impl IntoIterator<Item = Document>) -> Result<InvertedIndex> {
    let mut w = IndexWriter::new();
    for d in docs {
        w.add(d)?;
    }
    Ok(w.commit())
}

impl InvertedIndex {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.vocab
            .id(term)
            .map_or(&[], |id| self.postings[id as usize].as_slice())
    }

    pub fn norm(&self, doc: usize) -> f64 {
        self.norms[doc]
    }

    pub fn doc_vector(&self, doc: usize) -> TermVector {
        tfidf_vector(&self.tokenizer.get().tokenize(&self.docs[doc].full_text()), &self.vocab)
    }

    pub fn query_vector(&self, query: &str) -> TermVector {
        tfidf_vector(&self.tokenizer.get().tokenize(query), &self.vocab)
    }

    /// Top-k documents by cosine similarity to the query; zero scores are
    /// left out. A query with no tokens yields an empty list and a warning.
    pub fn search(&self, query: &str, k: usize) -> RankedList {
        let mut list = RankedList::new(query);
        if self.tokenizer.get().tokenize(query).is_empty() {
            list.warnings.push("empty query after tokenization".into());
            return list;
        }
        let q = self.query_vector(query);
        if q.norm() == 0.0 {
            return list;
        }
        let mut acc = vec![0.0f64; self.docs.len()];
        for &(term, wq) in q.entries() {
            let idf = self.vocab.idf(term);
            for p in &self.postings[term as usize] {
                acc[p.doc as usize] += wq * p.tf as f64 * idf;
            }
        }
        list.entries = acc
            .iter()
            .enumerate()
            .filter(|&(_, &dot)| dot > 0.0)
            .map(|(d, &dot)| RankedEntry {
                doc: self.docs[d].clone(),
                score: (dot / (q.norm() * self.norms[d])).min(1.0),
                source: self.docs[d].source,
                backend: String::new(),
            })
            .collect();
        list.sort_standard();
        list.truncate(k);
        list
    }

    /// Writes the documents as JSON lines; `load` re-indexes them.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for d in &self.docs {
            serde_json::to_writer(&mut out, d)?;
            out.push(b'\n');
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)
            .and_then(|mut f| f.write_all(&out))
            .and_then(|_| std::fs::rename(&tmp, path))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<InvertedIndex> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut w = IndexWriter::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path.display().to_string(), i + 1, e.to_string()))?;
            w.add(doc)?;
        }
        Ok(w.commit())
    }
}
