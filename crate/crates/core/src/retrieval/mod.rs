//! Exhaustive typed-entity retrieval: the entity-type label is the query and
//! every paragraph containing a mention of that type is relevant.

mod dense;
mod eval;
mod index;
mod run;

use thiserror::Error;

pub use dense::{dense_rank, load_vectors, save_vectors, DenseVectorStore, VectorFile};
pub use eval::{
    evaluate_runs, pearson, recall_at_rel, relevance_sets, RetrievalReport, TypeRecall,
};
pub use index::{bm25_rank, Bm25Params, InvertedIndex, Posting};
pub use run::{load_runs, save_runs, RankedRetrievalRun};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
    #[error("query {0:?} has no tokens")]
    EmptyQuery(String),
    #[error("vector dimension {found} does not match store dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector `{0}` has zero norm")]
    ZeroVector(String),
    #[error("vector `{0}` has a non-finite entry")]
    NonFinite(String),
    #[error("relevance set for `{0}` is empty")]
    EmptyRelevance(String),
    #[error("no run for test type `{0}`")]
    MissingRun(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}
