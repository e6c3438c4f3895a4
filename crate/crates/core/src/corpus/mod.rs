//! Shared data model: lexicon, paragraphs, link graph, annotated datasets,
//! and their line-delimited file formats.

mod error;
mod lexicon;
mod paragraph;
pub mod tokenize;

pub use error::{LoadError, ValidationError};
pub use lexicon::{hierarchy_closure, EntityEntry, EntityType, Lexicon, LexiconRecord};
pub use paragraph::{
    load_corpus, read_corpus, save_corpus, AnnotatedParagraph, LinkGraph, MentionSpan, Paragraph,
    SilverDataset,
};
pub use tokenize::{fold, tokenize, Token};
