//! User profiles of weighted topics, visit learning, chi-square query
//! expansion and profile-based re-ranking.

mod chi2;
mod profile;
mod rerank;
mod store;

pub use chi2::{chi_square, expand_query, Chi2, ContingencyTable, Expansion, TermCategoryStats, CHI2_CRITICAL, DEFAULT_EXPANSION_CAP};
pub use profile::{init_profile, record_visit, UserProfile, VisitOutcome};
pub use rerank::rerank_by_profile;
pub use store::ProfileStore;
