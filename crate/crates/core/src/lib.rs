//! Toolkit for building silver-annotated fine-grained NER corpora from
//! entity-type lexicons, and for evaluating exhaustive typed-entity retrieval
//! and span-level NER against them.
//!
//! The stages compose as follows:
//!
//! - [`corpus`]: data model, deterministic tokenization, line-delimited file formats.
//! - [`matcher`]: relaxed (slop-bounded) gazetteer matching of lexicon aliases.
//! - [`filter`]: per-type TF-IDF + linear SVM context filters that discard
//!   implausible matches.
//! - [`pipeline`]: dataset assembly, stratified splits, sampling and audit worksheets.
//! - [`retrieval`]: BM25 and dense cosine ranking, Recall@|REL| evaluation.
//! - [`ner_eval`]: exact/relaxed span P/R/F1 and out-of-type false-positive rate.
//! - [`synthetic`]: a seeded synthetic corpus generator with a construction oracle.

pub mod corpus;
pub mod filter;
pub mod jsonl;
pub mod matcher;
pub mod ner_eval;
pub mod pipeline;
pub mod retrieval;
pub mod seed;
pub mod synthetic;

pub use corpus::{
    hierarchy_closure, tokenize, AnnotatedParagraph, EntityEntry, EntityType, Lexicon, LinkGraph,
    LoadError, MentionSpan, Paragraph, SilverDataset, Token, ValidationError,
};
