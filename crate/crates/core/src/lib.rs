//! Integrated search framework: focused crawling, indexing, metasearch,
//! taxonomy-based categorization and clustering, and personalization.

mod error;

pub mod categorize;
pub mod crawler;
pub mod evaluation;
pub mod index;
pub mod personalization;
pub mod pipeline;
pub mod taxonomy;
pub mod text;

pub use error::{Error, Result};
