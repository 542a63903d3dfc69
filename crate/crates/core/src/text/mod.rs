//! Tokenization, vocabulary, tf-idf weighting and cosine similarity.

mod tokenize;
mod vector;

pub use tokenize::{default_tokenizer, tokenize, StopWords, TokenStream, Tokenizer};
pub use vector::{cosine_similarity, tfidf_vector, TermId, TermVector, Vocabulary};
