//! Silver dataset assembly and the seeded procedures run over its output.

mod assemble;
mod audit;
mod sample;
mod split;

use thiserror::Error;

pub use assemble::{
    assemble, select_holdout, select_paragraphs, spans_from_matches, AssemblyConfig, RunMetadata,
};
pub use audit::{audit_sample, AuditReport, AuditRow, AuditWorksheet, Judgment};
pub use sample::{stratified_sample, SampleDraw};
pub use split::{split, Split, SplitAssignment, SplitConfig, SplitReport};

use crate::corpus::ValidationError;
use crate::filter::FilterError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("assembled dataset is empty")]
    EmptyDataset,
    #[error("sample size {requested} exceeds available {available} paragraphs")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("sample size must be positive")]
    EmptySample,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("worksheet: {0}")]
    Worksheet(String),
}
