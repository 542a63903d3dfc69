use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENGLISH_STOP_WORDS: &str = include_str!("../../data/stopwords.txt");

/// Tokens at or below this length are kept verbatim; short words are mostly
/// acronyms ("ups", "bbc") that suffix stripping would mangle.
const MIN_STEM_LEN: usize = 4;

/// Stemming rounds before giving up on reaching a fixpoint.
const MAX_STEM_ROUNDS: usize = 8;

static DEFAULT_TOKENIZER: LazyLock<Tokenizer> = LazyLock::new(Tokenizer::default);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// Parses the stop-word file format: one word per line, `#` comments.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        StopWords(words)
    }

    pub fn english() -> Self {
        Self::parse(ENGLISH_STOP_WORDS)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordered, normalized terms of a text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenStream(tokens)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = String>) {
        self.0.extend(other)
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Lowercases, splits on non-alphanumeric boundaries, drops stop words and
/// applies an English suffix-stripping stemmer.
pub struct Tokenizer {
    stop_words: StopWords,
    stemmer: Stemmer,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::new(StopWords::english())
    }
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tokenizer")
            .field("stop_words", &self.stop_words.len())
            .finish()
    }
}

impl Tokenizer {
    pub fn new(stop_words: StopWords) -> Self {
        Tokenizer {
            stop_words,
            stemmer: Stemmer::create(Algorithm::English),
        }
    }

    pub fn stop_words(&self) -> &StopWords {
        &self.stop_words
    }

    pub fn tokenize(&self, text: &str) -> TokenStream {
        let lowered = text.to_lowercase();
        let tokens = lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty() && !self.stop_words.contains(w))
            .map(|w| self.stem(w))
            .filter(|w| !w.is_empty() && !self.stop_words.contains(w))
            .collect();
        TokenStream(tokens)
    }

    /// Stems `word` until the stemmer leaves it unchanged.
    pub fn stem(&self, word: &str) -> String {
        if word.chars().count() < MIN_STEM_LEN {
            return word.to_string();
        }
        let mut current = word.to_string();
        for _ in 0..MAX_STEM_ROUNDS {
            let next = self.stemmer.stem(&current);
            if next == current || next.chars().count() < MIN_STEM_LEN {
                return next.into_owned();
            }
            current = next.into_owned();
        }
        current
    }
}

/// Tokenizes with the built-in English stop-word list.
pub fn tokenize(text: &str) -> TokenStream {
    DEFAULT_TOKENIZER.tokenize(text)
}

pub fn default_tokenizer() -> &'static Tokenizer {
    &DEFAULT_TOKENIZER
}
