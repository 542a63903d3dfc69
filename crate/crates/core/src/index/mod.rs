//! Searchable documents, the inverted index, search backends and result merging.

mod backend;
mod desktop;
mod document;
mod inverted;
mod merge;
mod ranked;
mod records;
mod remote;

pub use backend::{
    dispatch, select_backends, BackendDescriptor, BackendKind, BackendRegistry, BackendResult, DispatchOutcome,
    LocalIndexBackend, RegisteredBackend, SearchBackend,
};
pub use desktop::DesktopBackend;
pub use document::{Document, SourceTag};
pub use inverted::{index_documents, IndexWriter, InvertedIndex, Posting};
pub use merge::{merge_results, min_max_normalize};
pub use ranked::{standard_order, RankedEntry, RankedList};
pub use records::{query_structured_records, Record, RecordsBackend, RecordsStore};
pub use remote::RemoteBackend;
