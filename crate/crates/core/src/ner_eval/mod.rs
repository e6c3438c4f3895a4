//! Span-level NER scoring against a silver dataset: exact and relaxed
//! (word-overlap) matching, P/R/F1 with micro and macro aggregation, and the
//! out-of-type false-positive rate.

mod matching;
mod metrics;
mod predictions;

use thiserror::Error;

pub use matching::{match_exact, match_relaxed, Counts, TypedMention};
pub use metrics::{aggregate, evaluate, prf, Average, EvalReport, Scores, TypeScores};
pub use predictions::{
    fp_rate, gold_mentions, load_predictions, paragraphs_lacking_type, GoldAndPredicted,
    Prediction, PredictionSet, PredictionTarget, TypeResolver,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for paragraph `{0}` not present in the gold dataset")]
    UnknownParagraph(String),
    #[error("span [{start}, {end}) out of range in paragraph `{paragraph_id}`")]
    SpanOutOfRange {
        paragraph_id: String,
        start: usize,
        end: usize,
    },
    #[error("evaluation paragraph set is empty")]
    EmptyParagraphSet,
}
